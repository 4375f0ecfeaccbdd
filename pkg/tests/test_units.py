import math

import pytest

from solnoise.units import (
    FIG2_LOSS_GAMMA,
    UnitMap,
    from_physical,
    gamma_from_db_per_km,
    gamma_from_db_per_period,
    to_physical,
    xi_to_zeta,
    zeta_to_xi,
)

PS = 1.0e-12


def test_soliton_period_relation():
    u = UnitMap(t0=PS, k2=-1.0e-26)
    assert u.soliton_period == pytest.approx(0.5 * math.pi * u.length_scale, rel=1e-15)
    assert u.length_scale == pytest.approx(PS**2 / 1.0e-26, rel=1e-15)


def test_cutoff_to_125_ghz():
    u = UnitMap(t0=PS, k2=-1.0e-26)
    assert to_physical(u, 0.125, "frequency") == pytest.approx(125.0e9, rel=1e-12)


def test_xi_zeta_relation():
    assert xi_to_zeta(4.0) == pytest.approx(2 * math.pi, rel=1e-15)
    assert zeta_to_xi(xi_to_zeta(1.7)) == pytest.approx(1.7, rel=1e-14)


def test_zero_loss_maps_to_zero():
    u = UnitMap(t0=PS, k2=-2.0e-26)
    assert gamma_from_db_per_km(u, 0.0) == 0.0


def test_loss_round_trip():
    u = UnitMap(t0=PS, k2=-1.27e-26)
    gamma = gamma_from_db_per_km(u, 0.1)
    assert to_physical(u, gamma, "loss-rate") == pytest.approx(0.1, rel=1e-12)


@pytest.mark.parametrize("kind,value", [
    ("length", 3.7), ("frequency", 0.125), ("time", 2.5), ("loss-rate", 1.7e-3),
])
def test_physical_round_trip(kind, value):
    u = UnitMap(t0=1.3e-12, k2=-2.1e-26)
    there = to_physical(u, value, kind)
    assert from_physical(u, there, kind) == pytest.approx(value, rel=1e-12)


def test_unknown_kind_rejected():
    u = UnitMap(t0=PS, k2=-1e-26)
    with pytest.raises(ValueError, match="unknown kind"):
        to_physical(u, 1.0, "mass")


def test_fig2_loss_preset():
    # the preset reproduces 0.0236 power-dB of loss per soliton period
    per_period_db = 20.0 * FIG2_LOSS_GAMMA * (math.pi / 2) / math.log(10.0)
    assert per_period_db == pytest.approx(0.0236, rel=1e-12)
    assert gamma_from_db_per_period(0.0236) == pytest.approx(FIG2_LOSS_GAMMA, rel=1e-15)


def test_unitmap_validation():
    with pytest.raises(ValueError):
        UnitMap(t0=0.0, k2=-1e-26)
    with pytest.raises(ValueError):
        UnitMap(t0=PS, k2=0.0)
