import numpy as np
import pytest

from solnoise.grid import TimeGrid, forward_transform, inverse_transform, make_grid


def test_spacings_from_definitions():
    g = make_grid(8, 4.0)
    assert g.d_tau == 1.0
    assert g.d_omega == pytest.approx(np.pi / 4, abs=0)
    g2 = make_grid(512, 10.0)
    assert g2.d_tau == 0.0390625


def test_spacing_identity_exact():
    for n, w in [(8, 4.0), (64, 7.5), (2048, 20.0)]:
        g = make_grid(n, w)
        assert g.d_tau * g.n_points == 2 * g.tau_window


@pytest.mark.parametrize("bad_n", [0, 7, 12, 100, -8, 4])
def test_rejects_non_power_of_two(bad_n):
    with pytest.raises(ValueError):
        make_grid(bad_n, 4.0)


@pytest.mark.parametrize("bad_w", [0.0, -1.0])
def test_rejects_bad_window(bad_w):
    with pytest.raises(ValueError):
        make_grid(64, bad_w)


def test_omega_grid_pairing():
    g = make_grid(64, 5.0)
    neg = g.negated_index
    # involution, and every +omega bin has its -omega partner; the
    # Nyquist bin is self-paired (fftfreq labels it negative)
    assert np.array_equal(neg[neg], np.arange(64))
    nyq = 32
    assert neg[nyq] == nyq
    others = np.arange(64) != nyq
    assert np.allclose(g.omega[neg][others], -g.omega[others], atol=0)


def test_round_trip_sech():
    g = make_grid(1024, 20.0)
    f = (1 / np.cosh(g.tau)).astype(complex)
    back = inverse_transform(forward_transform(f, g), g)
    assert np.max(np.abs(back - f)) / np.max(np.abs(f)) < 1e-13


def test_round_trip_random_within_machine_eps(rng):
    g = make_grid(256, 8.0)
    f = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    back = inverse_transform(forward_transform(f, g), g)
    assert np.max(np.abs(back - f)) < 10 * 256 * np.finfo(float).eps


def test_sech_transform_matches_closed_form():
    # unitary convention: sech(tau) -> sqrt(pi/2) sech(pi omega / 2)
    g = make_grid(2048, 20.0)
    spec = forward_transform(1 / np.cosh(g.tau) + 0j, g)
    ref = np.sqrt(np.pi / 2) / np.cosh(np.pi * g.omega / 2)
    assert np.max(np.abs(spec - ref)) < 1e-7


def test_even_input_gives_even_spectrum():
    g = make_grid(512, 15.0)
    spec = forward_transform(1 / np.cosh(g.tau) + 0j, g)
    assert np.max(np.abs(spec[g.negated_index] - spec)) < 1e-12


def test_batch_transform_matches_single(rng):
    g = make_grid(128, 6.0)
    fields = rng.standard_normal((3, 128)) + 1j * rng.standard_normal((3, 128))
    batch = forward_transform(fields, g)
    for i in range(3):
        assert np.array_equal(batch[i], forward_transform(fields[i], g))


def test_metadata_carries_convention():
    meta = make_grid(64, 4.0).metadata()
    assert meta["n_points"] == 64
    assert "exp(-i*omega*tau)" in meta["transform"]


def test_grid_is_immutable():
    g = make_grid(64, 4.0)
    with pytest.raises((AttributeError, TypeError)):
        g.n_points = 128
    with pytest.raises(ValueError):
        g.tau[0] = 99.0
