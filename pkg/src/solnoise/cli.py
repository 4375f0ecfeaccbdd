"""Command-line interface: simulate, figure, validate, sweep.

Exit codes: 0 success, 2 configuration error, 3 invariant or acceptance
failure, 4 divergence budget exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, example_config, load_config
from .ensemble import DivergenceBudgetError, run_ensemble
from .experiments import SweepSpec, transition_sweep
from .figures import FIGURE_IDS, run_figure
from .integrator import propagate
from .observables import FilterSpec
from .runio import (
    RunManifest,
    config_hash,
    elapsed,
    start_clock,
    write_binary,
    write_csv,
    write_report,
)
from .units import xi_to_zeta
from .validate import format_table, run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_DIVERGENCE = 4


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--trajectories", type=int, help="ensemble size (overrides config)")
    p.add_argument("--grid", help="grid as NxW, e.g. 1024x20 (overrides config)")
    p.add_argument("--steps", type=float, help="step size d_zeta (overrides config)")
    p.add_argument("--out", "-o", default="out", help="output directory")
    p.add_argument(
        "--threads", type=int, default=1,
        help="worker processes (0 = machine parallelism)",
    )


def _common_overrides(args) -> list:
    ov = []
    if args.seed is not None:
        ov.append(f"run.seed={args.seed}")
    if args.trajectories is not None:
        ov.append(f"run.trajectories={args.trajectories}")
    if args.grid is not None:
        try:
            n, w = args.grid.lower().split("x")
            ov += [f"grid.n_points={int(n)}", f"grid.tau_window={float(w)}"]
        except ValueError:
            raise ConfigError(f"--grid must look like 1024x20, got {args.grid!r}")
    if args.steps is not None:
        ov.append(f"stepper.d_zeta={args.steps}")
    if args.threads is not None:
        ov.append(f"run.workers={args.threads}")
    return ov


def cmd_simulate(args) -> int:
    overrides = _common_overrides(args) + (args.override or [])
    if args.no_noise:
        overrides.append("model.noise=false")
    rc = load_config(args.config, overrides)
    t0 = start_clock()
    planes = [xi_to_zeta(x) for x in rc.planes_xi]
    filters = [FilterSpec(c) for c in rc.cutoffs]
    result = run_ensemble(
        rc.sim,
        rc.stepper,
        planes,
        filters,
        n_trajectories=rc.trajectories,
        chunk_size=rc.chunk_size,
        workers=rc.workers,
        n_batches=rc.n_batches,
    )
    result.check_divergence_budget()
    os.makedirs(args.out, exist_ok=True)
    files = []
    for xi in rc.planes_xi:
        rep = result.report(xi_to_zeta(xi))
        rep.metadata["xi"] = xi
        files += write_report(args.out, rep, basename=f"report_xi{xi:.3f}")
    for k in range(min(rc.dump_trajectories, rc.trajectories)):
        rec = propagate(
            rc.sim.initial_field(), rc.sim, rc.stepper, planes, trajectory_index=k
        )
        for zeta, fp in rec.snapshots:
            stack = np.stack([fp.phi, fp.phi_dag])
            files.append(
                write_binary(
                    os.path.join(args.out, f"trajectory{k:04d}_zeta{zeta:.4f}.c128"),
                    stack,
                    {
                        "rows": ["phi", "phi_dag"],
                        "zeta": zeta,
                        "trajectory": k,
                        "seed": rc.sim.seed,
                        **rc.sim.grid().metadata(),
                    },
                )
            )
    RunManifest(
        config_hash=config_hash(rc.raw),
        master_seed=rc.sim.seed,
        grid=rc.sim.grid().metadata(),
        wall_clock_s=elapsed(t0),
        diverged_trajectories=result.diverged,
        extra={"trajectories": rc.trajectories, "planes_xi": rc.planes_xi},
    ).write(args.out)
    print(f"wrote {len(files) + 1} files to {args.out}")
    return EXIT_OK


def cmd_figure(args) -> int:
    workers = args.threads if args.threads != 0 else (os.cpu_count() or 1)
    files = run_figure(
        args.id, args.tier, args.out, seed=args.seed if args.seed is not None else 12345,
        workers=workers,
    )
    print(f"wrote {len(files)} files to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_validation(noise_scale=args.noise_scale_hook)
    print(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def cmd_sweep(args) -> int:
    overrides = _common_overrides(args) + (args.override or [])
    rc = load_config(args.config, overrides)
    n_values = tuple(args.N) if args.N else SweepSpec().N_values
    spec = SweepSpec(
        N_values=n_values,
        xi_max=rc.sim.xi_max,
        cutoff_grid=tuple(rc.cutoffs) if len(rc.cutoffs) > 1 else SweepSpec().cutoff_grid,
        trajectories=rc.trajectories,
        variant=args.variant,
        n_points=rc.sim.n_points,
        tau_window=rc.sim.tau_window,
        d_zeta=rc.stepper.step_size(rc.sim),
        n_bar=rc.sim.n_bar,
        seed=rc.sim.seed,
        temperature=rc.sim.raman.temperature if rc.sim.raman else 300.0,
        workers=rc.workers,
        chunk_size=rc.chunk_size,
        n_batches=rc.n_batches,
    )
    curve = transition_sweep(spec, out_dir=os.path.join(args.out, "points"))
    os.makedirs(args.out, exist_ok=True)
    write_csv(
        os.path.join(args.out, f"transition_{args.variant}.csv"),
        {
            "N": list(curve.N_values),
            "fano_db": [e.fano_db for e in curve.entries],
            "fano_stderr_db": [e.fano_stderr_db for e in curve.entries],
            "xi_opt": [e.xi_opt for e in curve.entries],
            "cutoff_opt": [e.cutoff_opt for e in curve.entries],
            "flagged": [e.flagged for e in curve.entries],
        },
        {"variant": args.variant, "seed": rc.sim.seed},
    )
    RunManifest(
        config_hash=config_hash(rc.raw),
        master_seed=rc.sim.seed,
        grid=rc.sim.grid().metadata(),
        extra={"sweep_variant": args.variant},
    ).write(args.out)
    print(f"sweep written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="solnoise",
        description="Monte Carlo quantum-noise simulation of optical solitons",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="single-configuration ensemble run")
    p_sim.add_argument("--config", required=True, help="TOML config path")
    p_sim.add_argument("--no-noise", action="store_true", help="deterministic run")
    p_sim.add_argument(
        "--override", action="append", metavar="SEC.KEY=VAL",
        help="config override, repeatable",
    )
    _add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_fig = sub.add_parser("figure", help="run a preset figure-level study")
    p_fig.add_argument("id", choices=FIGURE_IDS)
    p_fig.add_argument("--tier", choices=("quick", "full"), default="quick")
    _add_common(p_fig)
    p_fig.set_defaults(func=cmd_figure)

    p_val = sub.add_parser("validate", help="run the fast invariant suite")
    p_val.add_argument(
        "--noise-scale-hook", type=float, default=1.0, help=argparse.SUPPRESS
    )
    p_val.set_defaults(func=cmd_validate)

    p_sw = sub.add_parser("sweep", help="generic transition sweep")
    p_sw.add_argument("--config", required=True)
    p_sw.add_argument("--variant", default="ideal",
                      choices=("ideal", "lossy", "raman", "normal-dispersion"))
    p_sw.add_argument("--N", type=float, action="append", help="sweep energy, repeatable")
    p_sw.add_argument(
        "--override", action="append", metavar="SEC.KEY=VAL",
        help="config override, repeatable",
    )
    _add_common(p_sw)
    p_sw.set_defaults(func=cmd_sweep)

    p_ex = sub.add_parser("example-config", help="print an annotated config file")
    p_ex.set_defaults(func=lambda args: print(example_config()) or EXIT_OK)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceBudgetError as exc:
        print(f"divergence budget exceeded: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
