"""Figure-level studies: energy sweeps, noise maps, filter landscapes.

One ensemble is propagated per (variant, N) point; every (distance,
cutoff) read-out is post-processing of the stored per-plane statistics,
so the 2-D optimisation costs one propagation.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .ensemble import EnsembleResult, run_ensemble
from .fields import SimConfig
from .integrator import StepperSpec
from .observables import EnsembleAccumulator, FilterSpec
from .raman import RamanSpec
from .units import FIG2_LOSS_GAMMA, xi_to_zeta

VARIANTS = ("ideal", "lossy", "raman", "normal-dispersion")

STDERR_TARGET_DB = 0.2


def _default_xi_grid(xi_max: float) -> tuple:
    return tuple(np.round(np.arange(0.25, xi_max + 1e-9, 0.25), 10))


def _default_cutoffs() -> tuple:
    return tuple(np.round(np.arange(0.05, 0.5 + 1e-9, 0.025), 10))


@dataclass(frozen=True)
class SweepSpec:
    """Parameters of one figure-level study."""

    N_values: tuple = tuple(np.round(np.arange(0.3, 1.3 + 1e-9, 0.1), 10))
    xi_max: float = 4.0
    xi_grid: Optional[tuple] = None
    cutoff_grid: tuple = field(default_factory=_default_cutoffs)
    trajectories: int = 1000
    variant: str = "ideal"
    n_points: int = 1024
    tau_window: float = 20.0
    d_zeta: float = 0.02
    n_bar: float = 1.0e8
    seed: int = 12345
    noise: bool = True
    temperature: float = 300.0
    pulse_width_s: float = 1.0e-12
    gamma_override: Optional[float] = None
    workers: int = 1
    chunk_size: int = 128
    n_batches: int = 16

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.xi_grid is None:
            object.__setattr__(self, "xi_grid", _default_xi_grid(self.xi_max))
        for name, g in (("xi_grid", self.xi_grid), ("cutoff_grid", self.cutoff_grid)):
            if len(g) == 0:
                raise ValueError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError(f"{name} must be strictly increasing")
        if max(self.xi_grid) > self.xi_max * (1 + 1e-9):
            raise ValueError("xi_grid exceeds xi_max")

    def gamma(self) -> float:
        if self.gamma_override is not None:
            return self.gamma_override
        return 0.0 if self.variant == "ideal" else FIG2_LOSS_GAMMA

    def raman_spec(self) -> Optional[RamanSpec]:
        if self.variant in ("raman", "normal-dispersion"):
            return RamanSpec(
                enabled=True,
                temperature=self.temperature,
                pulse_width_s=self.pulse_width_s,
            )
        return None

    def config(self, soliton_order: float) -> SimConfig:
        return SimConfig(
            soliton_order=soliton_order,
            n_bar=self.n_bar,
            gamma=self.gamma(),
            dispersion="normal" if self.variant == "normal-dispersion" else "anomalous",
            d_zeta=self.d_zeta,
            zeta_max=xi_to_zeta(self.xi_max),
            n_points=self.n_points,
            tau_window=self.tau_window,
            seed=self.seed,
            noise=self.noise,
            raman=self.raman_spec(),
        )

    def stepper(self) -> StepperSpec:
        return StepperSpec(d_zeta=self.d_zeta)

    def filters(self) -> tuple:
        return tuple(FilterSpec(cutoff=c) for c in self.cutoff_grid)

    def metadata(self) -> dict:
        meta = {k: v for k, v in asdict(self).items() if not isinstance(v, tuple)}
        meta["variant"] = self.variant
        meta["xi_grid"] = list(self.xi_grid)
        meta["cutoff_grid"] = list(self.cutoff_grid)
        meta["N_values"] = list(self.N_values)
        return meta


@dataclass
class PointResult:
    """Fano-dB table over (xi, cutoff) for one input energy."""

    soliton_order: float
    xi_grid: tuple
    cutoff_grid: tuple
    fano_db: np.ndarray  # (n_xi, n_cutoff)
    fano_stderr_db: np.ndarray
    clamped: np.ndarray
    degenerate: np.ndarray
    diverged: int
    trajectories: int
    ensemble: Optional[EnsembleResult] = None


def run_point(spec: SweepSpec, soliton_order: float, keep_ensemble: bool = True) -> PointResult:
    """Propagate one ensemble and tabulate fano over every (xi, cutoff)."""
    config = spec.config(soliton_order)
    planes = [xi_to_zeta(x) for x in spec.xi_grid]
    result = run_ensemble(
        config,
        spec.stepper(),
        planes,
        spec.filters(),
        n_trajectories=spec.trajectories,
        chunk_size=spec.chunk_size,
        workers=spec.workers,
        n_batches=spec.n_batches,
    )
    result.check_divergence_budget()

    n_xi, n_cut = len(spec.xi_grid), len(spec.cutoff_grid)
    fano = np.full((n_xi, n_cut), np.nan)
    stderr = np.full((n_xi, n_cut), np.nan)
    clamped = np.zeros((n_xi, n_cut), dtype=bool)
    degenerate = np.zeros((n_xi, n_cut), dtype=bool)
    for i, xi in enumerate(spec.xi_grid):
        rep = result.report(xi_to_zeta(xi))
        for j, fs in enumerate(rep.filtered):
            fano[i, j] = fs.fano_db
            stderr[i, j] = fs.fano_stderr_db
            clamped[i, j] = fs.clamped
            degenerate[i, j] = fs.degenerate
    return PointResult(
        soliton_order=soliton_order,
        xi_grid=spec.xi_grid,
        cutoff_grid=spec.cutoff_grid,
        fano_db=fano,
        fano_stderr_db=stderr,
        clamped=clamped,
        degenerate=degenerate,
        diverged=result.diverged,
        trajectories=spec.trajectories,
        ensemble=result if keep_ensemble else None,
    )


@dataclass
class OptimizationResult:
    soliton_order: float
    xi_opt: float
    cutoff_opt: float
    fano_db: float
    fano_stderr_db: float
    flagged: bool
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "soliton_order": self.soliton_order,
            "xi_opt": self.xi_opt,
            "cutoff_opt": self.cutoff_opt,
            "fano_db": self.fano_db,
            "fano_stderr_db": self.fano_stderr_db,
            "flagged": self.flagged,
            "reason": self.reason,
        }


def optimize_table(point: PointResult) -> OptimizationResult:
    """Grid argmin of fano over (xi, cutoff); ties to smaller xi, then cutoff."""
    N = point.soliton_order
    if np.all(point.degenerate):
        return OptimizationResult(
            N, point.xi_grid[0], point.cutoff_grid[0], 0.0, 0.0, True, "degenerate"
        )
    flagged = False
    reason = ""
    finite = np.isfinite(point.fano_stderr_db)
    if not np.all(finite) or np.nanmax(point.fano_stderr_db) > STDERR_TARGET_DB:
        flagged = True
        reason = "stderr target unmet"
    best = (math.inf, None, None)
    for i, xi in enumerate(point.xi_grid):
        for j, cut in enumerate(point.cutoff_grid):
            v = point.fano_db[i, j]
            if not np.isfinite(v):
                continue
            if v < best[0]:
                best = (v, i, j)
    if best[1] is None:
        return OptimizationResult(
            N, point.xi_grid[0], point.cutoff_grid[0], math.nan, math.nan, True,
            "no finite fano values",
        )
    v, i, j = best
    return OptimizationResult(
        N,
        point.xi_grid[i],
        point.cutoff_grid[j],
        float(v),
        float(point.fano_stderr_db[i, j]),
        flagged,
        reason,
    )


def optimize_filter_distance(soliton_order: float, spec: SweepSpec) -> OptimizationResult:
    return optimize_table(run_point(spec, soliton_order, keep_ensemble=False))


@dataclass
class TransitionCurve:
    """Optimal filtered noise versus input energy."""

    N_values: tuple
    entries: list
    metadata: dict

    def fano_values(self) -> np.ndarray:
        return np.array([e.fano_db for e in self.entries])


def _point_path(out_dir: str, variant: str, soliton_order: float) -> str:
    return os.path.join(out_dir, f"point_{variant}_N{soliton_order:.4f}.json")


def _write_atomic_json(path: str, payload: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
    os.replace(tmp, path)


def transition_sweep(spec: SweepSpec, out_dir: Optional[str] = None) -> TransitionCurve:
    """Optimised fano over the N sweep; per-point files allow resuming."""
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    entries = []
    for N in spec.N_values:
        path = _point_path(out_dir, spec.variant, N) if out_dir else None
        if path and os.path.exists(path):
            with open(path) as fh:
                data = json.load(fh)
            entries.append(OptimizationResult(**data))
            continue
        opt = optimize_filter_distance(N, spec)
        entries.append(opt)
        if path:
            _write_atomic_json(path, opt.to_dict())
    return TransitionCurve(
        N_values=spec.N_values, entries=entries, metadata=spec.metadata()
    )


@dataclass
class NoiseMap:
    """Per-frequency variance (and mean) versus propagation distance."""

    soliton_order: float
    nu: np.ndarray
    xi: np.ndarray
    var: np.ndarray  # (n_xi, n_bins)
    var_stderr: np.ndarray
    mean: np.ndarray
    mean_stderr: np.ndarray
    diverged: int
    metadata: dict


def noise_map(
    soliton_order: float,
    xi_grid: Sequence[float],
    spec: SweepSpec,
    ensemble: Optional[EnsembleResult] = None,
) -> NoiseMap:
    if ensemble is None:
        pt = run_point(replace(spec, xi_grid=tuple(xi_grid)), soliton_order)
        ensemble = pt.ensemble
    reports = [ensemble.report(xi_to_zeta(x)) for x in xi_grid]
    return NoiseMap(
        soliton_order=soliton_order,
        nu=reports[0].nu,
        xi=np.asarray(list(xi_grid), dtype=float),
        var=np.stack([r.var_spectrum for r in reports]),
        var_stderr=np.stack([r.var_stderr for r in reports]),
        mean=np.stack([r.mean_spectrum for r in reports]),
        mean_stderr=np.stack([r.mean_stderr for r in reports]),
        diverged=ensemble.diverged,
        metadata={**spec.metadata(), "soliton_order": soliton_order},
    )


def snapshot_spectra(
    N_values: Sequence[float], xi: float, spec: SweepSpec
) -> dict:
    """Variance spectra for several input energies at one plane."""
    out = {}
    for N in N_values:
        pt = run_point(replace(spec, xi_grid=(xi,)), N)
        out[N] = pt.ensemble.report(xi_to_zeta(xi))
    return out


def filter_landscape(
    spec: SweepSpec,
    soliton_order: float = 1.0,
) -> PointResult:
    """Fano landscape over (cutoff, distance) for the Raman-inclusive run."""
    if spec.raman_spec() is None:
        raise ValueError("filter_landscape requires a Raman-enabled variant")
    return run_point(spec, soliton_order)


def mean_spectrum_asymmetry_z(acc: EnsembleAccumulator) -> float:
    """z-score of the signed red/blue asymmetry of the mean spectrum.

    Positive means the positive-nu (Stokes) side is heavier.  Computed
    per batch so bin-to-bin correlations are handled by the batch spread.
    """
    grid = acc.grid
    neg = grid.negated_index
    pos = grid.nu > 0
    stats = []
    for b in range(acc.n_batches):
        if acc.counts[b] == 0:
            continue
        m = np.real(acc.mean[b])
        stats.append(float(np.sum(m[pos] - m[neg][pos]) * grid.d_omega))
    stats = np.asarray(stats)
    spread = np.std(stats, ddof=1)
    if spread == 0:
        return 0.0
    return float(np.mean(stats) / (spread / math.sqrt(len(stats))))
