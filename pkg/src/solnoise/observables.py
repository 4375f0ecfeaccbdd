"""Spectral observables and ensemble statistics.

Per trajectory the spectral intensity sample is n(omega) =
phi_dag~(-omega) * phi~(omega) with the continuum-normalised transform,
so that sum_k n(omega_k) d_omega equals the pulse energy exactly.
Ensemble statistics use plain (unconjugated) second moments: in the
positive-P representation those pseudo-moments equal normal-ordered
quantum moments, so the per-frequency variance may legitimately be
negative (squeezing) and the coherent-state baseline sits at zero.

The filtered photon-number Fano factor converts to dB against shot
noise as 10*log10(1 + n_bar * V_s / <n>_s); 0 dB is the shot-noise
level, negative values are squeezed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fields import FieldPair
from .grid import TimeGrid, forward_transform

FANO_FLOOR = 1.0e-300


@dataclass(frozen=True)
class FilterSpec:
    """Ideal pass-band filter on the dimensionless ordinary-frequency axis.

    Transmits |nu - center| <= cutoff (units 1/t0).  The pairing weight
    applied to n(omega) is f(-omega)*f(omega); for the centered filters
    used throughout this is simply the band indicator.
    """

    cutoff: float
    center: float = 0.0
    kind: str = "ideal-pass-band"

    def __post_init__(self):
        if self.kind != "ideal-pass-band":
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if not self.cutoff > 0:
            raise ValueError("cutoff must be > 0")

    def transmission(self, grid: TimeGrid) -> np.ndarray:
        """f(omega) on the grid bins, values in {0, 1}."""
        return (np.abs(grid.nu - self.center) <= self.cutoff * (1 + 1e-12)).astype(float)

    def pair_weight(self, grid: TimeGrid) -> np.ndarray:
        f = self.transmission(grid)
        return f[grid.negated_index] * f


@dataclass
class SpectralSample:
    """One trajectory's spectral intensity and optional filtered number."""

    n_omega: np.ndarray  # complex, fft bin order
    n_filtered: Optional[complex] = None


def spectral_intensity(
    phi: np.ndarray, phi_dag: np.ndarray, grid: TimeGrid
) -> np.ndarray:
    """n(omega) = phi_dag~(-omega)*phi~(omega) for one field or a batch."""
    ft = forward_transform(phi, grid)
    ft_dag = forward_transform(phi_dag, grid)
    return ft_dag[..., grid.negated_index] * ft


def filtered_number(n_omega: np.ndarray, grid: TimeGrid, spec: FilterSpec):
    """Pass-band Riemann sum of n(omega) (Eq. weight f(-w)f(w) d_omega)."""
    w = spec.pair_weight(grid) * grid.d_omega
    return n_omega @ w.astype(complex)


def spectral_sample(
    field_pair: FieldPair, grid: TimeGrid, filter_spec: Optional[FilterSpec] = None
) -> SpectralSample:
    n_omega = spectral_intensity(field_pair.phi, field_pair.phi_dag, grid)
    n_filt = None
    if filter_spec is not None:
        n_filt = complex(filtered_number(n_omega, grid, filter_spec))
    return SpectralSample(n_omega=n_omega, n_filtered=n_filt)


class EnsembleAccumulator:
    """Mergeable running pseudo-moments of n(omega) and filtered numbers.

    Samples are assigned to n_batches interleaved batches by trajectory
    index, which makes both the statistics and the batch-means error
    bars independent of worker scheduling as long as chunks of
    consecutive trajectories are merged in index order.
    """

    def __init__(
        self,
        grid: TimeGrid,
        filters: Sequence[FilterSpec] = (),
        n_batches: int = 16,
    ):
        if n_batches < 2:
            raise ValueError("n_batches must be >= 2")
        self.grid = grid
        self.filters = tuple(filters)
        self.n_batches = n_batches
        n = grid.n_points
        nf = len(self.filters)
        self.counts = np.zeros(n_batches, dtype=np.int64)
        self.mean = np.zeros((n_batches, n), dtype=np.complex128)
        self.m2 = np.zeros((n_batches, n), dtype=np.complex128)
        self.fmean = np.zeros((n_batches, nf), dtype=np.complex128)
        self.fm2 = np.zeros((n_batches, nf), dtype=np.complex128)
        self.diverged = 0
        self._weights = np.stack(
            [f.pair_weight(grid) * grid.d_omega for f in self.filters]
        ).astype(complex) if nf else np.zeros((0, n), dtype=complex)

    @property
    def count(self) -> int:
        return int(self.counts.sum())

    @property
    def variance_defined(self) -> bool:
        return self.count >= 2

    def add(self, trajectory_index: int, n_omega: np.ndarray) -> None:
        """Welford update with one trajectory's spectral sample."""
        b = trajectory_index % self.n_batches
        self.counts[b] += 1
        c = self.counts[b]
        delta = n_omega - self.mean[b]
        self.mean[b] += delta / c
        self.m2[b] += delta * (n_omega - self.mean[b])
        if self.filters:
            nf = self._weights @ n_omega
            fdelta = nf - self.fmean[b]
            self.fmean[b] += fdelta / c
            self.fm2[b] += fdelta * (nf - self.fmean[b])

    def add_sample(self, trajectory_index: int, sample: SpectralSample) -> None:
        self.add(trajectory_index, sample.n_omega)

    def add_diverged(self, count: int = 1) -> None:
        self.diverged += count

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        """Pool another accumulator into this one (in place, returns self)."""
        if other.grid.n_points != self.grid.n_points or other.filters != self.filters:
            raise ValueError("cannot merge accumulators with different grid/filters")
        if other.n_batches != self.n_batches:
            raise ValueError("cannot merge accumulators with different batch counts")
        for b in range(self.n_batches):
            na, nb = self.counts[b], other.counts[b]
            if nb == 0:
                continue
            tot = na + nb
            delta = other.mean[b] - self.mean[b]
            self.mean[b] += delta * (nb / tot)
            self.m2[b] += other.m2[b] + delta * delta * (na * nb / tot)
            fdelta = other.fmean[b] - self.fmean[b]
            self.fmean[b] += fdelta * (nb / tot)
            self.fm2[b] += other.fm2[b] + fdelta * fdelta * (na * nb / tot)
            self.counts[b] = tot
        self.diverged += other.diverged
        return self

    def pooled(self):
        """(count, mean, m2, fmean, fm2) pooled over batches in batch order."""
        count = 0
        mean = np.zeros_like(self.mean[0])
        m2 = np.zeros_like(self.m2[0])
        fmean = np.zeros_like(self.fmean[0])
        fm2 = np.zeros_like(self.fm2[0])
        for b in range(self.n_batches):
            nb = int(self.counts[b])
            if nb == 0:
                continue
            tot = count + nb
            delta = self.mean[b] - mean
            mean = mean + delta * (nb / tot)
            m2 = m2 + self.m2[b] + delta * delta * (count * nb / tot)
            fdelta = self.fmean[b] - fmean
            fmean = fmean + fdelta * (nb / tot)
            fm2 = fm2 + self.fm2[b] + fdelta * fdelta * (count * nb / tot)
            count = tot
        return count, mean, m2, fmean, fm2


def accumulate(acc: EnsembleAccumulator, trajectory_index: int, sample: SpectralSample):
    """Functional alias for EnsembleAccumulator.add_sample."""
    acc.add_sample(trajectory_index, sample)
    return acc


@dataclass
class FilteredNumberStats:
    cutoff: float
    center: float
    mean_dimensionless: float
    var_dimensionless: float
    mean_photons: float
    mean_stderr: float
    fano_db: float
    fano_stderr_db: float
    clamped: bool
    degenerate: bool
    imag_z: float


@dataclass
class NoiseReport:
    """Finalized ensemble statistics (frequency arrays in ascending nu)."""

    nu: np.ndarray
    mean_spectrum: np.ndarray
    var_spectrum: np.ndarray
    mean_stderr: np.ndarray
    var_stderr: np.ndarray
    filtered: tuple
    samples: int
    diverged: int
    n_batches: int
    n_bar: float
    metadata: dict = field(default_factory=dict)

    @property
    def filtered_fano_db(self) -> float:
        if len(self.filtered) != 1:
            raise ValueError("filtered_fano_db needs exactly one filter")
        return self.filtered[0].fano_db

    @property
    def filtered_mean_photons(self) -> float:
        if len(self.filtered) != 1:
            raise ValueError("filtered_mean_photons needs exactly one filter")
        return self.filtered[0].mean_photons


def fano_db_from_moments(mean_s: float, var_s: float, n_bar: float):
    """(fano_db, clamped) from dimensionless filtered moments."""
    if mean_s <= 0:
        return math.nan, True
    arg = 1.0 + n_bar * var_s / mean_s
    if arg <= FANO_FLOOR:
        return -math.inf, True
    return 10.0 * math.log10(arg), False


def finalize(acc: EnsembleAccumulator, n_bar: float) -> NoiseReport:
    """Convert accumulated moments into a NoiseReport with batch error bars."""
    count, mean, m2, fmean, fm2 = acc.pooled()
    if count < 2:
        raise ValueError(f"need at least 2 samples to finalize, have {count}")
    if count < acc.n_batches:
        raise ValueError(
            f"need at least n_batches={acc.n_batches} samples, have {count}"
        )
    grid = acc.grid
    order = np.argsort(grid.nu, kind="stable")
    nu = grid.nu[order]

    var = m2 / (count - 1)
    mean_spectrum = np.real(mean)[order]
    var_spectrum = np.real(var)[order]

    bmask = acc.counts >= 2
    nb_eff = int(np.sum(bmask))
    if nb_eff >= 2:
        batch_means = np.real(acc.mean[bmask])
        batch_vars = np.real(acc.m2[bmask] / (acc.counts[bmask, None] - 1))
        mean_stderr = np.std(batch_means, axis=0, ddof=1) / math.sqrt(nb_eff)
        var_stderr = np.std(batch_vars, axis=0, ddof=1) / math.sqrt(nb_eff)
    else:
        mean_stderr = np.full(grid.n_points, math.nan)
        var_stderr = np.full(grid.n_points, math.nan)

    filtered = []
    for i, fspec in enumerate(acc.filters):
        mean_s = float(np.real(fmean[i]))
        var_s = float(np.real(fm2[i] / (count - 1)))
        fano_db, clamped = fano_db_from_moments(mean_s, var_s, n_bar)
        degenerate = var_s == 0.0

        bfanos = []
        for b in range(acc.n_batches):
            if acc.counts[b] < 2:
                continue
            bm = float(np.real(acc.fmean[b, i]))
            bv = float(np.real(acc.fm2[b, i] / (acc.counts[b] - 1)))
            f_db, cl = fano_db_from_moments(bm, bv, n_bar)
            if cl:
                clamped = True
                continue
            bfanos.append(f_db)
        if len(bfanos) >= 2 and not degenerate:
            fano_stderr = float(np.std(bfanos, ddof=1) / math.sqrt(len(bfanos)))
        else:
            fano_stderr = 0.0 if degenerate else math.nan

        if nb_eff >= 2:
            bmeans = np.real(acc.fmean[bmask, i])
            fmean_stderr = float(np.std(bmeans, ddof=1) / math.sqrt(nb_eff))
            imag_scale = float(np.std(np.imag(acc.fmean[bmask, i]), ddof=1))
            imag_z = (
                abs(float(np.imag(fmean[i]))) / (imag_scale / math.sqrt(nb_eff))
                if imag_scale > 0
                else 0.0
            )
        else:
            fmean_stderr = math.nan
            imag_z = math.nan
        filtered.append(
            FilteredNumberStats(
                cutoff=fspec.cutoff,
                center=fspec.center,
                mean_dimensionless=mean_s,
                var_dimensionless=var_s,
                mean_photons=n_bar * mean_s,
                mean_stderr=fmean_stderr,
                fano_db=fano_db,
                fano_stderr_db=fano_stderr,
                clamped=clamped,
                degenerate=degenerate,
                imag_z=imag_z,
            )
        )

    return NoiseReport(
        nu=nu,
        mean_spectrum=mean_spectrum,
        var_spectrum=var_spectrum,
        mean_stderr=mean_stderr,
        var_stderr=var_stderr,
        filtered=tuple(filtered),
        samples=count,
        diverged=acc.diverged,
        n_batches=acc.n_batches,
        n_bar=n_bar,
        metadata=dict(grid.metadata()),
    )
