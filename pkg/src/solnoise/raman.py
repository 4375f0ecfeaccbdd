"""Delayed (Raman) nonlinear response with thermal phonon noise.

The delayed fraction of the nonlinearity is modelled by a causal
response kernel of unit area applied to the intensity by frequency
domain convolution, and by a multiplicative phase-noise field whose
spectral density follows the imaginary part of the kernel response
weighted by the phonon occupation.

All kernel constants shipped here are module defaults chosen to be
representative of fused silica; they are configuration, not derived
quantities, and can be replaced by a tabulated kernel.

Sign conventions: with this project's transform (forward kernel
exp(-i*omega*tau)), the delayed response transfers energy toward
positive omega bins, so positive frequency offsets are the Stokes (red)
side.  The thermal factor uses occupation n+1 on the Stokes side and n
on the anti-Stokes side, so densities at +/-omega differ by the
detailed-balance ratio exp(hbar*Omega/kT).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.constants import hbar, k as k_boltzmann

from .grid import TimeGrid
from .noise import CHANNEL_RAMAN, NOISE_BLOCK, StreamKey, block_generator

# Damped-oscillator defaults (seconds), typical of fused silica.
DEFAULT_TAU1_S = 12.2e-15
DEFAULT_TAU2_S = 32.0e-15
DEFAULT_RAMAN_FRACTION = 0.18

#: Overall normalisation of the thermal phase-noise density.  The shape
#: of the density is fixed by the kernel response and the phonon
#: occupation; its absolute magnitude is not derivable from the model
#: inputs here (it depends on fiber details such as the full Raman gain
#: curve and guided-acoustic contributions), so this module default is
#: calibrated once against the published room-temperature filtered
#: squeezing optimum of the 1 ps fundamental-soliton study.
DEFAULT_NOISE_SCALE = 50.0


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class DampedOscillatorKernel:
    """Single damped-oscillator response, unit area by construction.

    h(t) = (tau1^2 + tau2^2)/(tau1 * tau2^2) * exp(-t/tau2) * sin(t/tau1)
    for t >= 0.  Times are in seconds; evaluation is done analytically in
    the frequency domain so the femtosecond oscillation need not be
    resolved by the simulation grid.
    """

    tau1_s: float = DEFAULT_TAU1_S
    tau2_s: float = DEFAULT_TAU2_S

    def __post_init__(self):
        if self.tau1_s <= 0 or self.tau2_s <= 0:
            raise KernelError("oscillator time constants must be positive")

    def response(self, omega_rad_s: np.ndarray) -> np.ndarray:
        """Analytic transform integral h(t) exp(-i Omega t) dt; response(0) = 1."""
        a = 1.0 / self.tau2_s
        b = 1.0 / self.tau1_s
        return (a * a + b * b) / ((a + 1j * omega_rad_s) ** 2 + b * b)

    def grid_response(self, grid: TimeGrid, pulse_width_s: float) -> np.ndarray:
        return self.response(grid.omega / pulse_width_s)

    def time_samples(self, t_s: np.ndarray) -> np.ndarray:
        a = 1.0 / self.tau2_s
        b = 1.0 / self.tau1_s
        amp = (a * a + b * b) / b
        out = amp * np.exp(-a * np.clip(t_s, 0.0, None)) * np.sin(b * np.clip(t_s, 0.0, None))
        return np.where(t_s < 0.0, 0.0, out)


@dataclass(frozen=True)
class ExponentialKernel:
    """Single-sided exponential h(t) = exp(-t/tau_d)/tau_d, unit area."""

    tau_d_s: float

    def __post_init__(self):
        if self.tau_d_s <= 0:
            raise KernelError("tau_d must be positive")

    def response(self, omega_rad_s: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + 1j * omega_rad_s * self.tau_d_s)

    def grid_response(self, grid: TimeGrid, pulse_width_s: float) -> np.ndarray:
        return self.response(grid.omega / pulse_width_s)

    def time_samples(self, t_s: np.ndarray) -> np.ndarray:
        out = np.exp(-np.clip(t_s, 0.0, None) / self.tau_d_s) / self.tau_d_s
        return np.where(t_s < 0.0, 0.0, out)


@dataclass(frozen=True, eq=False)
class TabulatedKernel:
    """Causal kernel given by samples h(t_j) on t_j >= 0 (seconds).

    The response is evaluated by resampling onto the simulation grid, so
    the table must resolve the kernel.  Area is validated to 1e-6.
    """

    t_s: np.ndarray
    h_per_s: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_s, dtype=float)
        h = np.asarray(self.h_per_s, dtype=float)
        if t.ndim != 1 or t.shape != h.shape or t.size < 4:
            raise KernelError("kernel table needs matching 1-d columns, >= 4 rows")
        if np.any(np.diff(t) <= 0) or t[0] < 0:
            raise KernelError("kernel table times must be increasing and >= 0")
        area = np.trapezoid(h, t)
        if abs(area - 1.0) > 1.0e-6:
            raise KernelError(f"kernel not normalized: area = {area:.8f}")
        object.__setattr__(self, "t_s", t)
        object.__setattr__(self, "h_per_s", h)

    def time_samples(self, t_s: np.ndarray) -> np.ndarray:
        return np.interp(t_s, self.t_s, self.h_per_s, left=0.0, right=0.0)

    def grid_samples(self, grid: TimeGrid, pulse_width_s: float) -> np.ndarray:
        """Dimensionless kernel on the grid's delay layout, rect-sum area 1.

        Delay j*d_tau sits at array index j; the table must resolve the
        kernel on this grid.  The rect-rule renormalisation keeps the
        discrete convolution exactly area-preserving.
        """
        delays_s = np.arange(grid.n_points) * grid.d_tau * pulse_width_s
        samples = self.time_samples(delays_s) * pulse_width_s
        area = float(np.sum(samples) * grid.d_tau)
        if area <= 0:
            raise KernelError("kernel table vanishes on the simulation grid")
        return samples / area

    def response(self, omega_rad_s: np.ndarray) -> np.ndarray:
        # transform sum over the table's own sampling (diagnostics only;
        # the convolution path uses grid_response)
        dt = np.gradient(self.t_s)
        phases = np.exp(-1j * np.outer(omega_rad_s, self.t_s))
        return phases @ (self.h_per_s * dt)

    def grid_response(self, grid: TimeGrid, pulse_width_s: float) -> np.ndarray:
        samples = self.grid_samples(grid, pulse_width_s)
        return np.fft.fft(samples) * grid.d_tau


def load_kernel_table(path: str, *, renormalize: bool = False) -> TabulatedKernel:
    """Read a two-column (t seconds, h 1/seconds) whitespace/CSV table."""
    data = np.loadtxt(path, delimiter=None, comments="#")
    if data.ndim != 2 or data.shape[1] != 2:
        raise KernelError(f"expected two columns in {path}")
    t, h = data[:, 0], data[:, 1]
    if renormalize:
        h = h / np.trapezoid(h, t)
    return TabulatedKernel(t_s=t, h_per_s=h)


@dataclass(frozen=True)
class RamanSpec:
    """Configuration of the delayed response and its thermal noise."""

    enabled: bool = True
    raman_fraction: float = DEFAULT_RAMAN_FRACTION
    temperature: float = 300.0
    pulse_width_s: float = 1.0e-12
    kernel: object = field(default_factory=DampedOscillatorKernel)
    noise_scale: float = DEFAULT_NOISE_SCALE

    def __post_init__(self):
        if not 0.0 <= self.raman_fraction < 1.0:
            raise ValueError("raman_fraction must be in [0, 1)")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.pulse_width_s <= 0:
            raise ValueError("pulse_width_s must be positive")

    def grid_response(self, grid: TimeGrid) -> np.ndarray:
        """Kernel frequency response on the grid's omega bins."""
        return self.kernel.grid_response(grid, self.pulse_width_s)


def bose_occupation(omega_rad_s, temperature: float):
    """Mean phonon number at |Omega|; 0 at T = 0."""
    omega_abs = np.abs(np.asarray(omega_rad_s, dtype=float))
    if temperature == 0.0:
        return np.zeros_like(omega_abs)
    x = hbar * omega_abs / (k_boltzmann * temperature)
    with np.errstate(divide="ignore", over="ignore"):
        occ = 1.0 / np.expm1(x)
    return np.where(omega_abs == 0.0, np.inf, occ)


def thermal_factor(omega_rad_s, temperature: float):
    """Occupation plus vacuum, n(|Omega|) + 1/2; -> 1/2 as T -> 0."""
    return bose_occupation(omega_rad_s, temperature) + 0.5


def noise_spectral_density(spec: RamanSpec, grid: TimeGrid) -> np.ndarray:
    """Per-bin density of the phase-noise field, relative to the electronic unit.

    S(omega) = f_R * |Im response| * (n + 1 on the Stokes side, n opposite),
    with the omega = 0 bin set by continuity (|Im response| ~ slope*omega
    against n ~ kT/hbar*Omega gives a finite plateau at T > 0).
    """
    omega_phys = grid.omega / spec.pulse_width_s
    im_part = np.abs(np.imag(spec.grid_response(grid)))
    occ = bose_occupation(omega_phys, spec.temperature)
    dens = np.where(grid.omega > 0, occ + 1.0, occ)
    with np.errstate(invalid="ignore"):
        s = spec.raman_fraction * im_part * dens
    if spec.temperature > 0:
        w1 = abs(omega_phys[1])
        slope = im_part[1] / w1
        s[0] = spec.raman_fraction * slope * k_boltzmann * spec.temperature / hbar
    else:
        s[0] = 0.0
    return spec.noise_scale * s


def convolve_intensity(intensity: np.ndarray, spec: RamanSpec, grid: TimeGrid) -> np.ndarray:
    """Circular convolution of the (complex) intensity with the kernel."""
    resp = spec.grid_response(grid)
    return np.fft.ifft(np.fft.fft(intensity, axis=-1) * resp, axis=-1)


def raman_drift(field_pair, spec: RamanSpec, grid: TimeGrid) -> np.ndarray:
    """Effective intensity replacing phi_dag*phi in the Kerr multiplier."""
    if not spec.enabled:
        raise ValueError("raman_drift called with a disabled RamanSpec")
    u = field_pair.phi_dag * field_pair.phi
    return effective_intensity(u, spec, grid)


def effective_intensity(intensity: np.ndarray, spec: RamanSpec, grid: TimeGrid) -> np.ndarray:
    f = spec.raman_fraction
    if f == 0.0:
        return intensity
    return (1.0 - f) * intensity + f * convolve_intensity(intensity, spec, grid)


@dataclass
class RamanNoiseDraw:
    """Per-step phase-noise increments for the two field equations."""

    theta1: np.ndarray
    theta2: np.ndarray
    d_zeta: float


def noise_bin_sigma(
    spec: RamanSpec, grid: TimeGrid, d_zeta: float, n_bar: float
) -> np.ndarray:
    """Per-frequency-bin standard deviation of the phase-noise fields.

    Scaled so that a flat S = 1 density would reproduce the electronic
    white-noise strength d_zeta/(n_bar*d_tau) per time-domain point.
    """
    dens = noise_spectral_density(spec, grid)
    return np.sqrt(dens * grid.n_points * d_zeta / (n_bar * grid.d_tau))


def raman_noise_block(
    master_seed: int,
    block_index: int,
    step_index: int,
    grid: TimeGrid,
    sigma: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """(theta1, theta2) for one whole block, shapes (NOISE_BLOCK, n)."""
    n = grid.n_points
    rng = block_generator(master_seed, block_index, step_index, CHANNEL_RAMAN)
    raw = rng.standard_normal((NOISE_BLOCK, 4 * n))
    scale = sigma * math.sqrt(0.5)
    spec1 = scale * (raw[:, 0:n] + 1j * raw[:, n : 2 * n])
    spec2 = scale * (raw[:, 2 * n : 3 * n] + 1j * raw[:, 3 * n : 4 * n])
    return np.fft.ifft(spec1, axis=-1), np.fft.ifft(spec2, axis=-1)


def raman_noise(
    key: StreamKey,
    spec: RamanSpec,
    grid: TimeGrid,
    d_zeta: float,
    n_bar: float,
) -> RamanNoiseDraw:
    """Draw the thermal phase-noise pair for one trajectory step.

    The fields couple multiplicatively: d phi += i*theta1*phi and
    d phi_dag += -i*theta2*phi_dag.  Both are circular complex Gaussians
    (zero pseudo-variance, so no Ito drift correction is induced), with
    per-frequency-bin variance S(omega) * n * d_zeta/(n_bar*d_tau).
    """
    n = grid.n_points
    if not spec.enabled or math.isinf(n_bar):
        zero = np.zeros(n, dtype=np.complex128)
        return RamanNoiseDraw(theta1=zero, theta2=zero.copy(), d_zeta=d_zeta)
    sigma = noise_bin_sigma(spec, grid, d_zeta, n_bar)
    block, row = divmod(key.trajectory_index, NOISE_BLOCK)
    theta1, theta2 = raman_noise_block(key.master_seed, block, key.step_index, grid, sigma)
    return RamanNoiseDraw(
        theta1=theta1[row].copy(), theta2=theta2[row].copy(), d_zeta=d_zeta
    )
