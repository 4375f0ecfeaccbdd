"""Self-convergence oracle for the filtered squeezing value.

The filtered Fano factor of the fundamental soliton at xi = 3 with a
0.125-cutoff filter must be squeezed (negative dB), and the value from
a coarse run must agree with a higher-resolution self-oracle run at 4x
the trajectories and half the step, within combined error bars plus a
step-bias allowance.  Runs at the exploratory grid tier (a couple of
minutes).
"""

import math

import numpy as np
import pytest

from solnoise.ensemble import run_ensemble
from solnoise.fields import SimConfig
from solnoise.integrator import StepperSpec
from solnoise.observables import FilterSpec
from solnoise.units import xi_to_zeta


def _fano(h, n_traj, seed=202408):
    cfg = SimConfig(
        soliton_order=1.0, n_bar=1e8, gamma=0.0, dispersion="anomalous",
        d_zeta=h, zeta_max=xi_to_zeta(3.0), n_points=512, tau_window=10.0,
        seed=seed,
    )
    res = run_ensemble(
        cfg, StepperSpec(), [xi_to_zeta(3.0)], [FilterSpec(0.125)],
        n_trajectories=n_traj, workers=2,
    )
    res.check_divergence_budget()
    fs = res.report(xi_to_zeta(3.0)).filtered[0]
    return fs.fano_db, fs.fano_stderr_db


def test_filtered_squeezing_self_convergence():
    base, base_err = _fano(h=0.02, n_traj=768)
    oracle, oracle_err = _fano(h=0.01, n_traj=4 * 768)

    assert base < 0.0 and oracle < 0.0, (base, oracle)
    # squeezing is strong, not marginal
    assert oracle < -2.0, oracle

    combined = math.hypot(base_err, oracle_err)
    assert abs(base - oracle) < 3.0 * combined + 0.2, (
        f"base {base:+.2f}({base_err:.2f}) vs oracle "
        f"{oracle:+.2f}({oracle_err:.2f})"
    )
