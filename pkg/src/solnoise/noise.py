"""Keyed generation of the delta-correlated Gaussian noise increments.

Streams are counter-based: a Philox generator is keyed by (master seed,
trajectory block) with counter words holding (step, channel), where a
block is a fixed group of NOISE_BLOCK consecutive trajectory indices
drawn as one array.  A trajectory's increments are therefore a pure
function of (master_seed, trajectory_index, step_index): ensembles are
bit-reproducible at any worker count or chunk size, and any single
trajectory can be re-propagated in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .grid import TimeGrid

#: Trajectories per keyed stream; fixed, independent of chunking.
NOISE_BLOCK = 64

# Channel indices (Philox counter word 3).
CHANNEL_ELECTRONIC = 0
CHANNEL_RAMAN = 1


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    trajectory_index: int
    step_index: int

    def __post_init__(self):
        if self.trajectory_index < 0 or self.step_index < 0:
            raise ValueError("trajectory_index and step_index must be >= 0")


@dataclass
class NoiseDraw:
    """Per-step noise increments for the two field equations.

    Each entry is Gaussian, zero mean, variance d_zeta/(n_bar*d_tau)
    (the delta-correlated noise integrated over one step and one cell).
    `variance` stores that per-entry variance; it doubles as the Ito
    drift-correction magnitude in the midpoint stepper.
    """

    w1: np.ndarray
    w2: np.ndarray
    d_zeta: float
    variance: float


def block_generator(master_seed: int, block_index: int, step_index: int, channel: int) -> Generator:
    """Deterministic generator for one (seed, block, step, channel)."""
    bits = Philox(
        key=np.array(
            [master_seed & 0xFFFFFFFFFFFFFFFF, block_index], dtype=np.uint64
        ),
        counter=np.array([0, 0, step_index, channel], dtype=np.uint64),
    )
    return Generator(bits)


def draw_noise_block(
    master_seed: int,
    block_index: int,
    step_index: int,
    grid: TimeGrid,
    d_zeta: float,
    n_bar: float,
) -> tuple[np.ndarray, np.ndarray, float]:
    """(w1, w2, variance) for one whole block, shapes (NOISE_BLOCK, n)."""
    if not d_zeta > 0:
        raise ValueError("d_zeta must be > 0")
    if not n_bar > 0:
        raise ValueError("n_bar must be > 0")
    n = grid.n_points
    if math.isinf(n_bar):
        zeros = np.zeros((NOISE_BLOCK, n))
        return zeros, zeros.copy(), 0.0
    variance = d_zeta / (n_bar * grid.d_tau)
    rng = block_generator(master_seed, block_index, step_index, CHANNEL_ELECTRONIC)
    w = rng.standard_normal((NOISE_BLOCK, 2 * n)) * math.sqrt(variance)
    return w[:, :n], w[:, n:], variance


def draw_noise(key: StreamKey, grid: TimeGrid, d_zeta: float, n_bar: float) -> NoiseDraw:
    """Draw the (w1, w2) pair for one trajectory step.

    n_bar = inf is the noise-off switch and returns exact zeros.
    """
    block, row = divmod(key.trajectory_index, NOISE_BLOCK)
    w1, w2, variance = draw_noise_block(
        key.master_seed, block, key.step_index, grid, d_zeta, n_bar
    )
    return NoiseDraw(
        w1=w1[row].copy(), w2=w2[row].copy(), d_zeta=d_zeta, variance=variance
    )
