import math

import numpy as np
import pytest

from solnoise.fields import sech_input
from solnoise.grid import make_grid
from solnoise.observables import (
    EnsembleAccumulator,
    FilterSpec,
    accumulate,
    fano_db_from_moments,
    filtered_number,
    finalize,
    spectral_intensity,
    spectral_sample,
)


@pytest.fixture(scope="module")
def sech_grid():
    return make_grid(2048, 20.0)


def test_all_pass_filter_recovers_pulse_energy(sech_grid):
    fp = sech_input(1.0, sech_grid)
    nyquist = np.max(np.abs(sech_grid.nu))
    sample = spectral_sample(fp, sech_grid, FilterSpec(cutoff=nyquist))
    assert sample.n_filtered.real == pytest.approx(2.0, abs=1e-6)
    assert abs(sample.n_filtered.imag) < 1e-12


def test_dc_only_filter(sech_grid):
    fp = sech_input(1.0, sech_grid)
    sample = spectral_sample(fp, sech_grid, FilterSpec(cutoff=1e-9))
    k0 = np.argmin(np.abs(sech_grid.nu))
    expected = sample.n_omega[k0] * sech_grid.d_omega
    assert sample.n_filtered == pytest.approx(expected, rel=1e-12)


def test_band_integral_matches_sech_closed_form(sech_grid):
    # oracle: bin sum of the closed-form sech spectrum (pi/2) sech^2(pi w/2)
    fp = sech_input(1.0, sech_grid)
    cutoff = 0.125
    sample = spectral_sample(fp, sech_grid, FilterSpec(cutoff=cutoff))
    mask = np.abs(sech_grid.nu) <= cutoff * (1 + 1e-12)
    oracle = np.sum(
        (np.pi / 2) / np.cosh(np.pi * sech_grid.omega[mask] / 2) ** 2
    ) * sech_grid.d_omega
    assert sample.n_filtered.real == pytest.approx(oracle, abs=1e-6)


def test_coherent_spectrum_real_nonnegative(sech_grid):
    fp = sech_input(0.9, sech_grid)
    n_omega = spectral_intensity(fp.phi, fp.phi_dag, sech_grid)
    assert np.max(np.abs(n_omega.imag)) < 1e-12
    assert np.min(n_omega.real) > -1e-15


def test_parseval_per_trajectory(rng):
    g = make_grid(256, 8.0)
    phi = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    phi_dag = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    n_omega = spectral_intensity(phi, phi_dag, g)
    lhs = np.sum(n_omega) * g.d_omega
    rhs = np.sum(phi_dag * phi) * g.d_tau
    assert abs(lhs - rhs) / abs(rhs) < 1e-10


def test_filter_monotone_in_cutoff(sech_grid, rng):
    phi = rng.standard_normal(2048) + 1j * rng.standard_normal(2048)
    n_omega = spectral_intensity(phi, np.conj(phi), sech_grid)
    values = [
        filtered_number(n_omega, sech_grid, FilterSpec(c)).real
        for c in (0.05, 0.1, 0.2, 0.4, 1.0, 10.0)
    ]
    assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_filter_validation():
    with pytest.raises(ValueError):
        FilterSpec(cutoff=0.0)
    with pytest.raises(ValueError):
        FilterSpec(cutoff=0.1, kind="butterworth")
    f = FilterSpec(cutoff=0.1)
    g = make_grid(64, 8.0)
    w = f.pair_weight(g)
    assert set(np.unique(w)).issubset({0.0, 1.0})


def test_accumulator_merge_equals_concatenation(rng):
    g = make_grid(64, 6.0)
    filters = (FilterSpec(0.2),)
    samples = rng.standard_normal((40, 64)) + 1j * rng.standard_normal((40, 64))

    whole = EnsembleAccumulator(g, filters, n_batches=4)
    for i, s in enumerate(samples):
        whole.add(i, s)

    part_a = EnsembleAccumulator(g, filters, n_batches=4)
    part_b = EnsembleAccumulator(g, filters, n_batches=4)
    for i, s in enumerate(samples):
        (part_a if i < 23 else part_b).add(i, s)
    part_a.merge(part_b)

    assert part_a.count == whole.count
    np.testing.assert_allclose(part_a.mean, whole.mean, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(part_a.m2, whole.m2, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(part_a.fmean, whole.fmean, rtol=1e-12)


def test_merge_rejects_mismatched():
    g = make_grid(64, 6.0)
    a = EnsembleAccumulator(g, (FilterSpec(0.2),), n_batches=4)
    b = EnsembleAccumulator(g, (FilterSpec(0.3),), n_batches=4)
    with pytest.raises(ValueError):
        a.merge(b)
    c = EnsembleAccumulator(g, (FilterSpec(0.2),), n_batches=8)
    with pytest.raises(ValueError):
        a.merge(c)


def test_single_sample_variance_flagged():
    g = make_grid(64, 6.0)
    acc = EnsembleAccumulator(g, (), n_batches=2)
    acc.add(0, np.ones(64, dtype=complex))
    assert not acc.variance_defined
    with pytest.raises(ValueError, match="at least"):
        finalize(acc, 1e8)


def test_synthetic_gaussian_moments_recovered(rng):
    g = make_grid(64, 6.0)
    acc = EnsembleAccumulator(g, (FilterSpec(0.3),), n_batches=16)
    M = 10000
    true_mean, true_std = 3.0, 0.5
    draws = true_mean + true_std * rng.standard_normal((M, 64))
    for i in range(M):
        acc.add(i, draws[i].astype(complex))
    rep = finalize(acc, 1.0)
    # recovered per-bin mean and variance within 3 standard errors
    se_mean = true_std / math.sqrt(M)
    assert np.max(np.abs(rep.mean_spectrum - true_mean)) < 4.5 * se_mean
    se_var = true_std**2 * math.sqrt(2.0 / M)
    assert np.max(np.abs(rep.var_spectrum - true_std**2)) < 4.5 * se_var
    # batch stderr estimates agree with the exact ones within a factor 2
    assert np.median(rep.mean_stderr) == pytest.approx(se_mean, rel=0.5)


def test_zero_variance_ensemble_reports_zero_db():
    g = make_grid(64, 6.0)
    acc = EnsembleAccumulator(g, (FilterSpec(0.2),), n_batches=4)
    fp = sech_input(1.0, g)
    s = spectral_sample(fp, g, FilterSpec(0.2))
    for i in range(8):
        accumulate(acc, i, s)
    rep = finalize(acc, 1e8)
    fs = rep.filtered[0]
    assert fs.fano_db == 0.0
    assert fs.degenerate
    assert fs.fano_stderr_db == 0.0
    assert np.all(rep.var_spectrum == 0.0)


def test_maximal_squeezing_clamp():
    # samples engineered so Re(pseudo-var) <= -mean/n_bar: the Fano
    # argument reaches the boundary and the guard clamps with a flag
    g = make_grid(8, 4.0)
    n_bar = 100.0
    mean_val = 2.0
    x = math.sqrt(mean_val / n_bar)
    acc = EnsembleAccumulator(g, (FilterSpec(10.0),), n_batches=2)
    base = np.zeros(8, dtype=complex)
    w = FilterSpec(10.0).pair_weight(g)[0] * g.d_omega
    # two samples whose filtered numbers are mean_val +- i*x
    for i, dev in enumerate((1j * x, -1j * x)):
        vec = base.copy()
        vec[0] = (mean_val + dev) / w
        acc.add(i, vec)
    rep = finalize(acc, n_bar)
    fs = rep.filtered[0]
    assert fs.clamped
    assert fs.fano_db == -math.inf


def test_fano_formula_values():
    fano, clamped = fano_db_from_moments(2.0, 3.0 / 1e8, 1e8)
    assert not clamped
    assert fano == pytest.approx(10 * math.log10(1 + 3.0 / 2.0), rel=1e-12)
    fano, clamped = fano_db_from_moments(0.0, 1.0, 1e8)
    assert clamped and math.isnan(fano)


def test_report_axes_sorted(sech_grid):
    acc = EnsembleAccumulator(sech_grid, (), n_batches=2)
    fp = sech_input(1.0, sech_grid)
    s = spectral_sample(fp, sech_grid)
    for i in range(4):
        acc.add(i, s.n_omega)
    rep = finalize(acc, 1e8)
    assert np.all(np.diff(rep.nu) > 0)
    # spectrum is the sech transform squared, peaked at nu = 0
    k0 = np.argmax(rep.mean_spectrum)
    assert abs(rep.nu[k0]) < 1e-12
