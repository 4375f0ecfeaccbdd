"""Split-step integration of the Ito positive-P field equations.

Each full step is a Strang composition: half a linear step (dispersion,
loss and the constant phase, applied exactly in the frequency domain),
one stochastic nonlinear step in the time domain, half a linear step.

The nonlinear step advances, per grid point,

    d phi     = (+i u) phi     d_zeta + exp(+i pi/4) phi     w1
    d phi_dag = (-i u) phi_dag d_zeta + exp(-i pi/4) phi_dag w2

with u = phi_dag*phi (optionally Raman-convolved) and w1, w2 the
independent real noise increments.  The default scheme is the
semi-implicit midpoint rule; because that rule converges to the
Stratonovich solution, the iterated drift carries the correction
-(i/2)*Var[w]/d_zeta so that ensemble moments solve the Ito equation.
Explicit Euler(-Maruyama) is retained as a cross-check reference.

Sign convention for the "anomalous" branch: it is the branch in which
sech(tau) is an exact stationary solution of the deterministic
equation, i.e. the frequency-domain linear factor is
exp[(-gamma - (i/2)(1 + omega^2)) h]; the constant phase then cancels
the usual soliton phase rotation.  "normal" flips the omega^2 sign;
"off" keeps only the loss (used by the single-mode oracle tests).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .fields import FieldPair, SimConfig
from .grid import TimeGrid
from .noise import NOISE_BLOCK, NoiseDraw, StreamKey, draw_noise, draw_noise_block
from .raman import (
    RamanNoiseDraw,
    RamanSpec,
    effective_intensity,
    noise_bin_sigma,
    raman_noise,
    raman_noise_block,
)

SQRT_I = np.exp(0.25j * np.pi)

SCHEMES = ("semi-implicit-midpoint", "explicit-euler")


@dataclass(frozen=True)
class StepperSpec:
    """Numerical stepping parameters.

    d_zeta = None takes the step from the SimConfig.  The divergence
    threshold is a hard per-point ceiling on |phi| and |phi_dag|;
    trajectories that cross it are flagged and excluded from statistics.
    """

    scheme: str = "semi-implicit-midpoint"
    d_zeta: Optional[float] = None
    divergence_threshold: float = 1.0e6
    midpoint_iterations: int = 4

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.d_zeta is not None and not self.d_zeta > 0:
            raise ValueError("d_zeta must be > 0")
        if not self.divergence_threshold > 0:
            raise ValueError("divergence_threshold must be > 0")
        if not 1 <= self.midpoint_iterations <= 8:
            raise ValueError("midpoint_iterations must be in 1..8")

    def step_size(self, config: SimConfig) -> float:
        return self.d_zeta if self.d_zeta is not None else config.d_zeta


@dataclass
class TrajectoryRecord:
    """Snapshots of one trajectory at the requested output planes."""

    snapshots: list = field(default_factory=list)  # (zeta, FieldPair) pairs
    diverged: bool = False
    diverged_zeta: Optional[float] = None


def _linear_exponent(grid: TimeGrid, gamma: float, dispersion: str) -> np.ndarray:
    if dispersion == "anomalous":
        return -gamma - 0.5j * (1.0 + grid.omega**2)
    if dispersion == "normal":
        return -gamma - 0.5j * (1.0 - grid.omega**2)
    if dispersion == "off":
        return np.full(grid.n_points, -gamma, dtype=np.complex128)
    raise ValueError(f"unknown dispersion {dispersion!r}")


def linear_step(
    field_pair: FieldPair,
    grid: TimeGrid,
    gamma: float,
    dispersion: str,
    h: float,
) -> FieldPair:
    """Exact linear propagation over h; phi_dag gets the conjugate exponent."""
    if not h > 0:
        raise ValueError("h must be > 0")
    mult = np.exp(_linear_exponent(grid, gamma, dispersion) * h)
    phi = np.fft.ifft(mult * np.fft.fft(field_pair.phi))
    phi_dag = np.fft.ifft(np.conj(mult) * np.fft.fft(field_pair.phi_dag))
    return FieldPair(phi=phi, phi_dag=phi_dag, zeta=field_pair.zeta + h)


def _apply_linear(phi, phi_dag, mult):
    phi[...] = np.fft.ifft(mult * np.fft.fft(phi, axis=-1), axis=-1)
    phi_dag[...] = np.fft.ifft(np.conj(mult) * np.fft.fft(phi_dag, axis=-1), axis=-1)


class _Workspace:
    """Preallocated per-batch buffers for the nonlinear update."""

    def __init__(self, batch: int, n: int):
        shape = (batch, n)
        self.mult1 = np.empty(shape, dtype=np.complex128)
        self.mult2 = np.empty(shape, dtype=np.complex128)
        self.u = np.empty(shape, dtype=np.complex128)
        self.t1 = np.empty(shape, dtype=np.complex128)
        self.t2 = np.empty(shape, dtype=np.complex128)
        self.mid = np.empty(shape, dtype=np.complex128)
        self.mid_dag = np.empty(shape, dtype=np.complex128)
        self.absbuf = np.empty(shape)

    def prepare_multipliers(self, w1, w2, variance, theta1=None, theta2=None,
                            stratonovich_correction=True):
        """mult = sqrt(i)*w (+ i*theta for the Raman channel).

        The midpoint rule converges to the Stratonovich solution, so it
        carries the drift correction -(i/2)Var; Euler-Maruyama is already
        an Ito scheme and must not.
        """
        np.multiply(w1, SQRT_I, out=self.mult1)
        np.multiply(w2, np.conj(SQRT_I), out=self.mult2)
        if stratonovich_correction:
            self.mult1 -= 0.5j * variance
            self.mult2 += 0.5j * variance
        if theta1 is not None:
            np.multiply(theta1, 1j, out=self.t1)
            self.mult1 += self.t1
            np.multiply(theta2, 1j, out=self.t2)
            self.mult2 -= self.t2


def _nonlinear_update(
    phi,
    phi_dag,
    ws: _Workspace,
    h: float,
    kerr: bool,
    raman_spec: Optional[RamanSpec],
    grid: TimeGrid,
    scheme: str,
    iterations: int,
):
    """In-place nonlinear step; ws.mult1/ws.mult2 must be prepared."""

    def make_k(p, pd, out):
        # out <- i*h*K(pd*p), K the (possibly delayed) intensity
        np.multiply(pd, p, out=out)
        if raman_spec is not None and raman_spec.enabled:
            out[...] = effective_intensity(out, raman_spec, grid)
        out *= 1j * h

    if scheme == "explicit-euler":
        if kerr:
            make_k(phi, phi_dag, ws.u)
            ws.u += ws.mult1            # k + mult1
            np.multiply(phi, ws.u, out=ws.t1)
            ws.u -= ws.mult1
            ws.u *= -1.0
            ws.u += ws.mult2            # -k + mult2
            np.multiply(phi_dag, ws.u, out=ws.t2)
        else:
            np.multiply(phi, ws.mult1, out=ws.t1)
            np.multiply(phi_dag, ws.mult2, out=ws.t2)
        phi += ws.t1
        phi_dag += ws.t2
        return

    ws.mid[...] = phi
    ws.mid_dag[...] = phi_dag
    for _ in range(iterations):
        if kerr:
            make_k(ws.mid, ws.mid_dag, ws.u)
            ws.u += ws.mult1
            np.multiply(ws.mid, ws.u, out=ws.t1)
            ws.u -= ws.mult1
            ws.u *= -1.0
            ws.u += ws.mult2
            np.multiply(ws.mid_dag, ws.u, out=ws.t2)
        else:
            np.multiply(ws.mid, ws.mult1, out=ws.t1)
            np.multiply(ws.mid_dag, ws.mult2, out=ws.t2)
        ws.t1 *= 0.5
        ws.t2 *= 0.5
        np.add(phi, ws.t1, out=ws.mid)
        np.add(phi_dag, ws.t2, out=ws.mid_dag)
    ws.mid *= 2.0
    ws.mid -= phi
    ws.mid_dag *= 2.0
    ws.mid_dag -= phi_dag
    phi[...] = ws.mid
    phi_dag[...] = ws.mid_dag


def nonlinear_step(
    field_pair: FieldPair,
    draw: NoiseDraw,
    h: float,
    *,
    kerr: bool = True,
    raman_spec: Optional[RamanSpec] = None,
    raman_draw: Optional[RamanNoiseDraw] = None,
    grid: Optional[TimeGrid] = None,
    scheme: str = "semi-implicit-midpoint",
    iterations: int = 4,
    divergence_threshold: float = 1.0e6,
) -> tuple[FieldPair, bool]:
    """One stochastic nonlinear step; returns (new state, diverged flag)."""
    if not math.isclose(draw.d_zeta, h, rel_tol=1e-12):
        raise ValueError(f"draw d_zeta {draw.d_zeta} does not match step h {h}")
    phi = field_pair.phi[np.newaxis, :].astype(np.complex128).copy()
    phi_dag = field_pair.phi_dag[np.newaxis, :].astype(np.complex128).copy()
    ws = _Workspace(1, phi.shape[1])
    theta1 = raman_draw.theta1 if raman_draw is not None else None
    theta2 = raman_draw.theta2 if raman_draw is not None else None
    ws.prepare_multipliers(
        draw.w1, draw.w2, draw.variance, theta1, theta2,
        stratonovich_correction=(scheme == "semi-implicit-midpoint"),
    )
    _nonlinear_update(phi, phi_dag, ws, h, kerr, raman_spec, grid, scheme, iterations)
    out = FieldPair(phi=phi[0], phi_dag=phi_dag[0], zeta=field_pair.zeta + h)
    worst = max(np.max(np.abs(out.phi)), np.max(np.abs(out.phi_dag)))
    return out, bool(worst > divergence_threshold)


NoiseSource = Callable[[int, int], NoiseDraw]
RamanSource = Callable[[int, int], RamanNoiseDraw]
PlaneCallback = Callable[[int, float, np.ndarray, np.ndarray, np.ndarray], None]


def plane_steps_for(planes: Sequence[float], h: float, zeta_max: float) -> list[int]:
    """Round requested zeta planes to integer step counts (deduplicated)."""
    steps = []
    for z in planes:
        if not 0.0 < z <= zeta_max * (1.0 + 1e-9):
            raise ValueError(f"output plane {z} outside (0, zeta_max={zeta_max}]")
        k = max(1, int(round(z / h)))
        steps.append(k)
    return sorted(set(steps))


def default_noise_source(config: SimConfig, grid: TimeGrid, h: float) -> NoiseSource:
    n_bar = config.n_bar if (config.noise and config.kerr) else math.inf

    def source(trajectory_index: int, step_index: int) -> NoiseDraw:
        key = StreamKey(config.seed, trajectory_index, step_index)
        return draw_noise(key, grid, h, n_bar)

    return source


def default_raman_source(config: SimConfig, grid: TimeGrid, h: float) -> Optional[RamanSource]:
    if config.raman is None or not config.raman.enabled or not config.kerr:
        return None
    spec = config.raman

    def source(trajectory_index: int, step_index: int) -> RamanNoiseDraw:
        key = StreamKey(config.seed, trajectory_index, step_index)
        n_bar = config.n_bar if config.noise else math.inf
        return raman_noise(key, spec, grid, h, n_bar)

    return source


def propagate_batch(
    phi: np.ndarray,
    phi_dag: np.ndarray,
    config: SimConfig,
    stepper: StepperSpec,
    plane_steps: Sequence[int],
    first_trajectory: int,
    on_plane: PlaneCallback,
    noise_source: Optional[NoiseSource] = None,
    raman_source: Optional[RamanSource] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance a batch of trajectories in place, reporting at plane steps.

    Rows are trajectories first_trajectory, first_trajectory+1, ...
    Returns (alive mask, diverged-at-zeta array with nan for survivors).

    The full linear multiplier is the elementwise square of the half
    multiplier, so inserting a snapshot boundary (half, record, half)
    reproduces the no-snapshot composition bit for bit.
    """
    grid = config.grid()
    h = stepper.step_size(config)
    batch, n = phi.shape
    # the multiplicative noise represents the Kerr interaction's vacuum
    # fluctuations: disabling the nonlinearity disables its noise too
    n_bar = config.n_bar if (config.noise and config.kerr) else math.inf
    raman_spec = None
    if config.kerr and config.raman and config.raman.enabled:
        raman_spec = config.raman
    raman_sigma = None
    if raman_spec is not None and raman_source is None and not math.isinf(n_bar):
        raman_sigma = noise_bin_sigma(raman_spec, grid, h, n_bar)
    raman_noise_on = raman_source is not None or raman_sigma is not None

    half = np.exp(_linear_exponent(grid, config.gamma, config.dispersion) * (0.5 * h))
    full = half * half

    plane_steps = list(plane_steps)
    if not plane_steps:
        raise ValueError("at least one output plane is required")
    if sorted(set(plane_steps)) != plane_steps:
        raise ValueError("plane_steps must be strictly increasing")
    total_steps = plane_steps[-1]
    plane_set = set(plane_steps)

    ws = _Workspace(batch, n)
    w1 = np.zeros((batch, n))
    w2 = np.zeros((batch, n))
    th1 = np.empty((batch, n), dtype=np.complex128) if raman_noise_on else None
    th2 = np.empty((batch, n), dtype=np.complex128) if raman_noise_on else None

    def fill_blocks(step, fill):
        # blockwise keyed draws; partial blocks at chunk edges are sliced
        r = 0
        while r < batch:
            t = first_trajectory + r
            block, row = divmod(t, NOISE_BLOCK)
            take = min(NOISE_BLOCK - row, batch - r)
            fill(block, row, take, r, step)
            r += take

    alive = np.ones(batch, dtype=bool)
    died_at = np.full(batch, np.nan)
    elec_on = noise_source is not None or not math.isinf(n_bar)

    _apply_linear(phi, phi_dag, half)
    variance = 0.0
    for s in range(total_steps):
        if elec_on:
            if noise_source is not None:
                for r in range(batch):
                    draw = noise_source(first_trajectory + r, s)
                    w1[r] = draw.w1
                    w2[r] = draw.w2
                    variance = draw.variance
            else:

                def fill_elec(block, row, take, r, step):
                    nonlocal variance
                    b1, b2, variance = draw_noise_block(
                        config.seed, block, step, grid, h, n_bar
                    )
                    w1[r : r + take] = b1[row : row + take]
                    w2[r : r + take] = b2[row : row + take]

                fill_blocks(s, fill_elec)
        if raman_noise_on:
            if raman_source is not None:
                for r in range(batch):
                    rdraw = raman_source(first_trajectory + r, s)
                    th1[r] = rdraw.theta1
                    th2[r] = rdraw.theta2
            else:

                def fill_raman(block, row, take, r, step):
                    b1, b2 = raman_noise_block(
                        config.seed, block, step, grid, raman_sigma
                    )
                    th1[r : r + take] = b1[row : row + take]
                    th2[r : r + take] = b2[row : row + take]

                fill_blocks(s, fill_raman)
        ws.prepare_multipliers(
            w1, w2, variance, th1, th2,
            stratonovich_correction=(stepper.scheme == "semi-implicit-midpoint"),
        )
        _nonlinear_update(
            phi,
            phi_dag,
            ws,
            h,
            config.kerr,
            raman_spec,
            grid,
            stepper.scheme,
            stepper.midpoint_iterations,
        )

        # divergence bookkeeping; dead rows are zeroed to stay finite
        np.abs(phi, out=ws.absbuf)
        peak = ws.absbuf.max(axis=-1)
        np.abs(phi_dag, out=ws.absbuf)
        np.maximum(peak, ws.absbuf.max(axis=-1), out=peak)
        newly_dead = alive & (peak > stepper.divergence_threshold)
        if np.any(newly_dead):
            died_at[newly_dead] = (s + 1) * h
            phi[newly_dead] = 0.0
            phi_dag[newly_dead] = 0.0
            alive[newly_dead] = False

        done = s + 1
        if done in plane_set:
            _apply_linear(phi, phi_dag, half)
            on_plane(done, done * h, phi, phi_dag, alive)
            if done < total_steps:
                _apply_linear(phi, phi_dag, half)
        elif done < total_steps:
            _apply_linear(phi, phi_dag, full)

    return alive, died_at


def propagate(
    initial: FieldPair,
    config: SimConfig,
    stepper: StepperSpec,
    output_planes: Sequence[float],
    trajectory_index: int = 0,
    noise_source: Optional[NoiseSource] = None,
    raman_source: Optional[RamanSource] = None,
) -> TrajectoryRecord:
    """Propagate one trajectory, capturing snapshots at the given zeta planes."""
    h = stepper.step_size(config)
    steps = plane_steps_for(output_planes, h, config.zeta_max)

    record = TrajectoryRecord()

    def capture(step, zeta, phi, phi_dag, alive):
        record.snapshots.append(
            (zeta, FieldPair(phi=phi[0].copy(), phi_dag=phi_dag[0].copy(), zeta=zeta))
        )

    phi = initial.phi[np.newaxis, :].astype(np.complex128).copy()
    phi_dag = initial.phi_dag[np.newaxis, :].astype(np.complex128).copy()
    alive, died_at = propagate_batch(
        phi,
        phi_dag,
        config,
        stepper,
        steps,
        trajectory_index,
        capture,
        noise_source=noise_source,
        raman_source=raman_source,
    )
    if not alive[0]:
        record.diverged = True
        record.diverged_zeta = float(died_at[0])
    return record
