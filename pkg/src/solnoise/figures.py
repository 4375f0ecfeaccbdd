"""Preset parameter sets for the paper-level figure studies.

quick tier targets minutes on a desktop; full tier targets
acceptance-grade error bars (hours for the sweep figures).
"""

from __future__ import annotations

import os
from dataclasses import replace

import numpy as np

from .experiments import (
    SweepSpec,
    filter_landscape,
    noise_map,
    optimize_table,
    snapshot_spectra,
    transition_sweep,
)
from .runio import RunManifest, config_hash, write_csv, write_map, write_report

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5")

# dense cutoff grid resolving the 0.0125-wide optimum of the landscape runs
FINE_CUTOFFS = (
    0.05, 0.0625, 0.075, 0.0875, 0.1, 0.1125, 0.125, 0.1375, 0.15, 0.1625,
    0.175, 0.2, 0.25, 0.3, 0.375, 0.5,
)


def _base_spec(tier: str, seed: int, workers: int) -> SweepSpec:
    if tier == "quick":
        return SweepSpec(
            trajectories=1000, d_zeta=0.02, n_points=1024, tau_window=20.0,
            seed=seed, workers=workers,
        )
    return SweepSpec(
        trajectories=4000, d_zeta=0.01, n_points=1024, tau_window=20.0,
        seed=seed, workers=workers,
    )


def _write_curve(out_dir: str, curve, label: str) -> str:
    return write_csv(
        os.path.join(out_dir, f"transition_{label}.csv"),
        {
            "N": list(curve.N_values),
            "fano_db": [e.fano_db for e in curve.entries],
            "fano_stderr_db": [e.fano_stderr_db for e in curve.entries],
            "xi_opt": [e.xi_opt for e in curve.entries],
            "cutoff_opt": [e.cutoff_opt for e in curve.entries],
            "flagged": [e.flagged for e in curve.entries],
        },
        {"variant": label, **{k: v for k, v in curve.metadata.items() if np.isscalar(v)}},
    )


def run_figure(figure_id: str, tier: str, out_dir: str, seed: int = 12345,
               workers: int = 1) -> list:
    """Run one preset study; returns the list of files written."""
    if figure_id not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {figure_id!r}; expected one of {FIGURE_IDS}")
    if tier not in ("quick", "full"):
        raise ValueError(f"tier must be quick or full, got {tier!r}")
    os.makedirs(out_dir, exist_ok=True)
    base = _base_spec(tier, seed, workers)
    files = []

    if figure_id == "fig1":
        spectra = snapshot_spectra([0.7, 0.9, 1.0], base.xi_max, base)
        for N, rep in spectra.items():
            files += write_report(out_dir, rep, basename=f"spectrum_N{N:.1f}")
        meta = base.metadata()

    elif figure_id == "fig2":
        n_vals = (
            tuple(np.round(np.arange(0.3, 1.3 + 1e-9, 0.1), 10))
            if tier == "full"
            else (0.3, 0.5, 0.7, 0.9, 1.1)
        )
        variants = [
            ("ideal_xi4", replace(base, variant="ideal", N_values=n_vals)),
            ("ideal_xi8", replace(base, variant="ideal", N_values=n_vals,
                                  xi_max=8.0, xi_grid=None)),
            ("raman_xi4", replace(base, variant="raman", N_values=n_vals)),
            ("normal_xi4", replace(base, variant="normal-dispersion", N_values=n_vals)),
        ]
        meta = base.metadata()
        for label, spec in variants:
            curve = transition_sweep(spec, out_dir=os.path.join(out_dir, "points"))
            files.append(_write_curve(out_dir, curve, label))

    elif figure_id in ("fig3", "fig5"):
        N = 1.0 if figure_id == "fig3" else 1.1
        nmap = noise_map(N, base.xi_grid, base)
        files += write_map(
            out_dir, f"map_N{N:.1f}", nmap.nu, nmap.xi, nmap.var,
            nmap.var_stderr, nmap.mean,
            {"soliton_order": N, "variant": base.variant},
        )
        meta = nmap.metadata

    else:  # fig4
        spec = replace(
            base,
            variant="raman",
            n_points=1024,
            tau_window=40.0,
            cutoff_grid=FINE_CUTOFFS,
            trajectories=base.trajectories if tier == "quick" else 6000,
        )
        point = filter_landscape(spec, soliton_order=1.0)
        files += write_map(
            out_dir, "fano_landscape",
            np.asarray(point.cutoff_grid), np.asarray(point.xi_grid),
            point.fano_db, point.fano_stderr_db, np.zeros_like(point.fano_db),
            {"axes_note": "rows xi, columns cutoff", "soliton_order": 1.0},
        )
        opt = optimize_table(point)
        files.append(
            write_csv(
                os.path.join(out_dir, "landscape_optimum.csv"),
                {
                    "xi_opt": [opt.xi_opt],
                    "cutoff_opt": [opt.cutoff_opt],
                    "fano_db": [opt.fano_db],
                    "fano_stderr_db": [opt.fano_stderr_db],
                    "flagged": [opt.flagged],
                },
                {"figure": "fig4"},
            )
        )
        meta = spec.metadata()

    manifest = RunManifest(
        config_hash=config_hash({"figure": figure_id, "tier": tier, **meta}),
        master_seed=seed,
        grid={"n_points": meta.get("n_points"), "tau_window": meta.get("tau_window")},
        extra={"figure": figure_id, "tier": tier},
    )
    files.append(manifest.write(out_dir))
    return files
