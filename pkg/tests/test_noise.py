import math

import numpy as np
import pytest

from solnoise.noise import (
    NOISE_BLOCK,
    StreamKey,
    draw_noise,
    draw_noise_block,
)


def test_identical_keys_bit_identical(grid512):
    a = draw_noise(StreamKey(42, 3, 7), grid512, 1e-3, 1e8)
    b = draw_noise(StreamKey(42, 3, 7), grid512, 1e-3, 1e8)
    assert np.array_equal(a.w1, b.w1)
    assert np.array_equal(a.w2, b.w2)


def test_distinct_keys_differ(grid512):
    base = draw_noise(StreamKey(42, 3, 7), grid512, 1e-3, 1e8)
    for key in [StreamKey(42, 4, 7), StreamKey(42, 3, 8), StreamKey(43, 3, 7)]:
        other = draw_noise(key, grid512, 1e-3, 1e8)
        assert not np.allclose(base.w1, other.w1)


def test_noise_off_switch(grid512):
    d = draw_noise(StreamKey(1, 0, 0), grid512, 1e-3, math.inf)
    assert np.all(d.w1 == 0.0) and np.all(d.w2 == 0.0)
    assert d.variance == 0.0


def test_variance_value(grid512):
    d = draw_noise(StreamKey(1, 0, 0), grid512, 1e-3, 1e8)
    assert d.variance == pytest.approx(1e-3 / (1e8 * grid512.d_tau), rel=1e-15)
    assert d.d_zeta == 1e-3


def test_sample_variance_matches_target(grid512):
    # > 1e6 draws; z within 3 standard errors of the chi-square statistics
    d_zeta, n_bar = 1e-3, 1e8
    target = d_zeta / (n_bar * grid512.d_tau)
    total_sq = 0.0
    total = 0.0
    count = 0
    for t in range(1100):
        d = draw_noise(StreamKey(314159, t, 5), grid512, d_zeta, n_bar)
        total += d.w1.sum() + d.w2.sum()
        total_sq += (d.w1**2).sum() + (d.w2**2).sum()
        count += 2 * grid512.n_points
    assert count >= 1_000_000
    var = total_sq / count - (total / count) ** 2
    z = (var - target) / (target * math.sqrt(2.0 / count))
    assert abs(z) < 3.0, f"variance z-score {z}"


def test_cross_channel_correlation_zero(grid512):
    d_zeta, n_bar = 1e-3, 1e8
    target = d_zeta / (n_bar * grid512.d_tau)
    cross = 0.0
    count = 0
    for t in range(1100):
        d = draw_noise(StreamKey(2718, t, 0), grid512, d_zeta, n_bar)
        cross += (d.w1 * d.w2).sum()
        count += grid512.n_points
    z = (cross / count) / (target / math.sqrt(count))
    assert abs(z) < 3.0, f"cross-correlation z-score {z}"


def test_step_to_step_correlation_zero(grid512):
    d_zeta, n_bar = 1e-3, 1e8
    target = d_zeta / (n_bar * grid512.d_tau)
    acc = 0.0
    count = 0
    for t in range(550):
        a = draw_noise(StreamKey(99, t, 0), grid512, d_zeta, n_bar)
        b = draw_noise(StreamKey(99, t, 1), grid512, d_zeta, n_bar)
        acc += (a.w1 * b.w1).sum() + (a.w2 * b.w2).sum()
        count += 2 * grid512.n_points
    z = (acc / count) / (target / math.sqrt(count))
    assert abs(z) < 3.0, f"step correlation z-score {z}"


def test_block_slicing_consistency(grid512):
    # a trajectory's draw equals its row of the block draw
    w1, w2, _ = draw_noise_block(7, 2, 9, grid512, 1e-3, 1e8)
    for row in (0, 5, NOISE_BLOCK - 1):
        d = draw_noise(StreamKey(7, 2 * NOISE_BLOCK + row, 9), grid512, 1e-3, 1e8)
        assert np.array_equal(d.w1, w1[row])
        assert np.array_equal(d.w2, w2[row])


def test_key_validation():
    with pytest.raises(ValueError):
        StreamKey(1, -1, 0)
    with pytest.raises(ValueError):
        StreamKey(1, 0, -2)


def test_draw_validation(grid512):
    with pytest.raises(ValueError):
        draw_noise(StreamKey(1, 0, 0), grid512, 0.0, 1e8)
    with pytest.raises(ValueError):
        draw_noise(StreamKey(1, 0, 0), grid512, 1e-3, 0.0)
