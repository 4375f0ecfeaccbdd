"""Chunked Monte Carlo ensemble driver.

Trajectories are processed in fixed-size chunks of consecutive indices;
each chunk is propagated as one vectorised batch and produces per-plane
accumulators, which are merged in chunk order.  Because the noise is
keyed by (seed, trajectory, step) and the chunk partition is a function
of chunk_size alone, results are bit-identical at any worker count.

Diverged trajectories are excluded from statistics in full: a chunk
that saw a divergence is re-run (same keys, so at no statistical cost)
accumulating only the trajectories that never diverged.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .fields import SimConfig
from .integrator import StepperSpec, plane_steps_for, propagate_batch
from .observables import (
    EnsembleAccumulator,
    FilterSpec,
    NoiseReport,
    finalize,
    spectral_intensity,
)

DIVERGENCE_BUDGET = 1.0e-4


class DivergenceBudgetError(RuntimeError):
    """Raised when the diverged-trajectory fraction exceeds the budget."""


def _chunk_ranges(n_trajectories: int, chunk_size: int):
    return [
        (start, min(start + chunk_size, n_trajectories))
        for start in range(0, n_trajectories, chunk_size)
    ]


def _run_chunk(
    config: SimConfig,
    stepper: StepperSpec,
    plane_steps: Sequence[int],
    filters: Sequence[FilterSpec],
    n_batches: int,
    start: int,
    stop: int,
):
    grid = config.grid()
    initial = config.initial_field(grid)
    batch = stop - start

    def fresh_accs():
        return [
            EnsembleAccumulator(grid, filters, n_batches=n_batches)
            for _ in plane_steps
        ]

    plane_index = {step: i for i, step in enumerate(plane_steps)}

    def run(include_mask):
        accs = fresh_accs()

        def on_plane(step, zeta, phi, phi_dag, alive):
            n_omega = spectral_intensity(phi, phi_dag, grid)
            acc = accs[plane_index[step]]
            for r in range(batch):
                if include_mask[r] and alive[r]:
                    acc.add(start + r, n_omega[r])

        phi = np.broadcast_to(initial.phi, (batch, grid.n_points)).astype(np.complex128).copy()
        phi_dag = (
            np.broadcast_to(initial.phi_dag, (batch, grid.n_points))
            .astype(np.complex128)
            .copy()
        )
        alive, died_at = propagate_batch(
            phi, phi_dag, config, stepper, list(plane_steps), start, on_plane
        )
        return accs, alive

    accs, alive = run(np.ones(batch, dtype=bool))
    n_diverged = int(np.sum(~alive))
    if n_diverged:
        accs, _ = run(alive.copy())
    for acc in accs:
        acc.add_diverged(n_diverged)
    return accs


@dataclass
class EnsembleResult:
    """Per-plane accumulators for one ensemble run."""

    config: SimConfig
    stepper: StepperSpec
    plane_zetas: list
    accumulators: list
    filters: tuple
    n_trajectories: int

    @property
    def diverged(self) -> int:
        return self.accumulators[0].diverged if self.accumulators else 0

    @property
    def divergence_fraction(self) -> float:
        return self.diverged / self.n_trajectories if self.n_trajectories else 0.0

    def check_divergence_budget(self, budget: float = DIVERGENCE_BUDGET) -> None:
        if self.divergence_fraction > budget:
            raise DivergenceBudgetError(
                f"{self.diverged}/{self.n_trajectories} trajectories diverged "
                f"(fraction {self.divergence_fraction:.2e} > budget {budget:.0e})"
            )

    def plane_index(self, zeta: float) -> int:
        err = [abs(z - zeta) for z in self.plane_zetas]
        i = int(np.argmin(err))
        if err[i] > 0.5 * self.stepper.step_size(self.config) + 1e-12:
            raise ValueError(f"no recorded plane near zeta={zeta}")
        return i

    def report(self, zeta: float, metadata: Optional[dict] = None) -> NoiseReport:
        i = self.plane_index(zeta)
        rep = finalize(self.accumulators[i], self.config.n_bar)
        rep.metadata.update(
            {
                "zeta": self.plane_zetas[i],
                "seed": self.config.seed,
                "trajectories": self.n_trajectories,
                "d_zeta": self.stepper.step_size(self.config),
            }
        )
        if metadata:
            rep.metadata.update(metadata)
        return rep

    def reports(self) -> list:
        return [self.report(z) for z in self.plane_zetas]


def run_ensemble(
    config: SimConfig,
    stepper: StepperSpec,
    planes: Sequence[float],
    filters: Sequence[FilterSpec] = (),
    n_trajectories: int = 1000,
    chunk_size: int = 128,
    workers: int = 1,
    n_batches: int = 16,
) -> EnsembleResult:
    """Propagate an ensemble and accumulate per-plane spectral statistics."""
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    h = stepper.step_size(config)
    plane_steps = plane_steps_for(planes, h, config.zeta_max)
    filters = tuple(filters)
    ranges = _chunk_ranges(n_trajectories, chunk_size)

    chunk_results = {}
    if workers > 1 and len(ranges) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(
                    _run_chunk, config, stepper, plane_steps, filters, n_batches,
                    start, stop,
                ): i
                for i, (start, stop) in enumerate(ranges)
            }
            for fut, i in futures.items():
                chunk_results[i] = fut.result()
    else:
        for i, (start, stop) in enumerate(ranges):
            chunk_results[i] = _run_chunk(
                config, stepper, plane_steps, filters, n_batches, start, stop
            )

    merged = chunk_results[0]
    for i in range(1, len(ranges)):
        for acc, other in zip(merged, chunk_results[i]):
            acc.merge(other)

    return EnsembleResult(
        config=config,
        stepper=stepper,
        plane_zetas=[s * h for s in plane_steps],
        accumulators=merged,
        filters=filters,
        n_trajectories=n_trajectories,
    )
