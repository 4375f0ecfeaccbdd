"""Field-pair state, coherent initial conditions and the run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from .grid import TimeGrid
from .units import xi_to_zeta

if TYPE_CHECKING:
    from .raman import RamanSpec

DISPERSION_SIGNS = ("anomalous", "normal", "off")
INPUT_SHAPES = ("sech", "gaussian")


@dataclass
class FieldPair:
    """One trajectory's state: the two independent positive-P fields.

    For a coherent input phi_dag starts as the complex conjugate of phi;
    the two fields decouple once noise acts.
    """

    phi: np.ndarray
    phi_dag: np.ndarray
    zeta: float = 0.0

    def __post_init__(self):
        if self.phi.shape != self.phi_dag.shape:
            raise ValueError("phi and phi_dag must have matching shapes")

    def copy(self) -> "FieldPair":
        return FieldPair(self.phi.copy(), self.phi_dag.copy(), self.zeta)

    def energy(self, grid: TimeGrid) -> complex:
        """Dimensionless pulse energy integral of phi_dag*phi over tau."""
        return complex(np.sum(self.phi_dag * self.phi) * grid.d_tau)


def sech_input(soliton_order: float, grid: TimeGrid) -> FieldPair:
    """Coherent N*sech(tau) input; phi_dag = conj(phi), zeta = 0."""
    if soliton_order < 0:
        raise ValueError(f"soliton_order must be >= 0, got {soliton_order}")
    phi = (soliton_order / np.cosh(grid.tau)).astype(np.complex128)
    return FieldPair(phi=phi, phi_dag=np.conj(phi), zeta=0.0)


def gaussian_input(amplitude: float, grid: TimeGrid, width: float = 1.0) -> FieldPair:
    """Coherent Gaussian input for contrast experiments."""
    if amplitude < 0:
        raise ValueError(f"amplitude must be >= 0, got {amplitude}")
    if width <= 0:
        raise ValueError(f"width must be > 0, got {width}")
    phi = (amplitude * np.exp(-(grid.tau**2) / (2.0 * width**2))).astype(np.complex128)
    return FieldPair(phi=phi, phi_dag=np.conj(phi), zeta=0.0)


@dataclass(frozen=True)
class SimConfig:
    """Physical and numerical parameters of a single-configuration run.

    soliton_order is the amplitude of the sech input; n_bar the photon
    number scale entering the noise correlation 1/n_bar; gamma the
    amplitude loss per unit zeta.  Distances: zeta_max = (pi/2)*xi_max.
    """

    soliton_order: float = 1.0
    n_bar: float = 1.0e8
    gamma: float = 0.0
    dispersion: str = "anomalous"
    d_zeta: float = 1.0e-3
    zeta_max: float = xi_to_zeta(4.0)
    n_points: int = 512
    tau_window: float = 10.0
    seed: int = 0
    noise: bool = True
    kerr: bool = True
    input_shape: str = "sech"
    input_width: float = 1.0
    raman: Optional["RamanSpec"] = None

    def __post_init__(self):
        if self.soliton_order < 0:
            raise ValueError("soliton_order must be >= 0")
        if not self.n_bar > 0:
            raise ValueError("n_bar must be > 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not self.d_zeta > 0:
            raise ValueError("d_zeta must be > 0")
        if not self.zeta_max > 0:
            raise ValueError("zeta_max must be > 0")
        if self.dispersion not in DISPERSION_SIGNS:
            raise ValueError(
                f"dispersion must be one of {DISPERSION_SIGNS}, got {self.dispersion!r}"
            )
        if self.input_shape not in INPUT_SHAPES:
            raise ValueError(
                f"input_shape must be one of {INPUT_SHAPES}, got {self.input_shape!r}"
            )

    @property
    def xi_max(self) -> float:
        return self.zeta_max / (0.5 * math.pi)

    def grid(self) -> TimeGrid:
        return TimeGrid(self.n_points, self.tau_window)

    def initial_field(self, grid: Optional[TimeGrid] = None) -> FieldPair:
        grid = grid if grid is not None else self.grid()
        if self.input_shape == "sech":
            return sech_input(self.soliton_order, grid)
        return gaussian_input(self.soliton_order, grid, self.input_width)
