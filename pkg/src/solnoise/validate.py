"""Fast invariant suite behind `solnoise validate`.

Each check is desk-scale (the full table runs in about a minute) and
prints one pass/fail row.  noise_scale is a negative-control hook: any
value other than 1 must make the noise-calibration check fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensemble import run_ensemble
from .fields import SimConfig
from .grid import forward_transform, inverse_transform, make_grid
from .integrator import StepperSpec, propagate
from .noise import StreamKey, draw_noise
from .observables import FilterSpec, spectral_intensity
from .units import xi_to_zeta


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_soliton_stationarity() -> CheckResult:
    cfg = SimConfig(
        soliton_order=1.0, noise=False, gamma=0.0, d_zeta=1e-3,
        zeta_max=xi_to_zeta(1.0), n_points=512, tau_window=10.0,
    )
    rec = propagate(cfg.initial_field(), cfg, StepperSpec(), [cfg.zeta_max])
    grid = cfg.grid()
    ref = 1.0 / np.cosh(grid.tau)
    err = np.linalg.norm(rec.snapshots[-1][1].phi - ref) / np.linalg.norm(ref)
    return CheckResult(
        "soliton stationarity (xi=1, 512/10)", err < 2e-3, f"rel L2 {err:.2e} < 2e-3"
    )


def check_loss_law() -> CheckResult:
    cfg = SimConfig(
        soliton_order=1.0, noise=False, gamma=0.2, d_zeta=1e-3,
        zeta_max=2.0, n_points=512, tau_window=10.0,
    )
    grid = cfg.grid()
    fp0 = cfg.initial_field(grid)
    e0 = fp0.energy(grid).real
    rec = propagate(fp0, cfg, StepperSpec(), [1.0, 2.0])
    worst = 0.0
    for z, fp in rec.snapshots:
        ratio = fp.energy(grid).real / e0
        worst = max(worst, abs(ratio - math.exp(-2 * cfg.gamma * z)) / math.exp(-2 * cfg.gamma * z))
    return CheckResult("loss law energy decay", worst < 1e-9, f"rel err {worst:.2e} < 1e-9")


def check_noise_calibration(noise_scale: float = 1.0) -> CheckResult:
    grid = make_grid(512, 10.0)
    d_zeta, n_bar = 1e-3, 1e8
    target = d_zeta / (n_bar * grid.d_tau)
    total, total_sq, cnt = 0.0, 0.0, 0
    for t in range(400):
        d = draw_noise(StreamKey(2024, t, 0), grid, d_zeta, n_bar)
        w = np.concatenate([d.w1, d.w2]) * noise_scale
        total += w.sum()
        total_sq += (w * w).sum()
        cnt += w.size
    var = total_sq / cnt - (total / cnt) ** 2
    z = (var - target) / (target * math.sqrt(2.0 / cnt))
    return CheckResult(
        "noise variance calibration", abs(z) < 4.0, f"z = {z:+.2f} (|z| < 4)"
    )


def check_parseval() -> CheckResult:
    grid = make_grid(512, 10.0)
    rng = np.random.default_rng(7)
    phi = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    phi_dag = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    n_omega = spectral_intensity(phi, phi_dag, grid)
    lhs = np.sum(n_omega) * grid.d_omega
    rhs = np.sum(phi_dag * phi) * grid.d_tau
    err = abs(lhs - rhs) / abs(rhs)
    rt = inverse_transform(forward_transform(phi, grid), grid)
    rt_err = np.max(np.abs(rt - phi))
    ok = err < 1e-10 and rt_err < 1e-12
    return CheckResult(
        "Parseval + transform round trip", ok, f"sum err {err:.1e}, roundtrip {rt_err:.1e}"
    )


def check_shot_noise_baseline() -> CheckResult:
    # nonlinearity disabled removes the Kerr drift and its representation
    # noise together: lossy linear propagation of a coherent state must
    # then sit exactly at the shot-noise zero level for every filter
    cfg = SimConfig(
        soliton_order=1.0, n_bar=1e8, gamma=0.05, dispersion="anomalous",
        d_zeta=0.01, zeta_max=2.0, n_points=512, tau_window=10.0,
        noise=True, kerr=False, seed=99,
    )
    filters = [FilterSpec(0.125), FilterSpec(0.375)]
    res = run_ensemble(cfg, StepperSpec(), [1.0, 2.0], filters, n_trajectories=64)
    worst = 0.0
    degenerate = True
    for z in (1.0, 2.0):
        rep = res.report(z)
        for fs in rep.filtered:
            worst = max(worst, abs(fs.fano_db))
            degenerate = degenerate and fs.degenerate
    ok = worst == 0.0 and degenerate
    return CheckResult(
        "shot-noise baseline (kerr off)", ok, f"max |fano| = {worst:.1e}, exact zero"
    )


def check_convergence_order() -> CheckResult:
    # Richardson estimate on the N=2 breather against a fine-step run on
    # the same grid, so only the time-stepping error is measured; the
    # target distance is divisible by every step so plane rounding is void
    def run(h):
        cfg = SimConfig(
            soliton_order=2.0, noise=False, gamma=0.0, d_zeta=h,
            zeta_max=1.6, n_points=512, tau_window=10.0,
        )
        rec = propagate(cfg.initial_field(), cfg, StepperSpec(), [1.6])
        return rec.snapshots[-1][1].phi

    ref = run(5e-4)
    scale = np.linalg.norm(ref)
    errs = [np.linalg.norm(run(h) - ref) / scale for h in (8e-3, 4e-3, 2e-3)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    ok = all(o > 1.5 for o in orders)
    return CheckResult(
        "deterministic step order", ok, f"orders {orders[0]:.2f}, {orders[1]:.2f} (> 1.5)"
    )


def run_validation(noise_scale: float = 1.0) -> list:
    return [
        check_soliton_stationarity(),
        check_loss_law(),
        check_noise_calibration(noise_scale),
        check_parseval(),
        check_shot_noise_baseline(),
        check_convergence_order(),
    ]


def format_table(results) -> str:
    width = max(len(r.name) for r in results) + 2
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}} {status}  {r.detail}")
    return "\n".join(lines)
