"""Monte Carlo simulation of quantum noise in optical soliton propagation.

Positive-P stochastic field equations on a periodic time grid, split-step
integration, spectral filtering observables and figure-level experiment
drivers.
"""

__version__ = "0.1.0"

from .ensemble import DivergenceBudgetError, EnsembleResult, run_ensemble
from .fields import FieldPair, SimConfig, gaussian_input, sech_input
from .grid import TRANSFORM_CONVENTION, TimeGrid, forward_transform, inverse_transform, make_grid
from .integrator import StepperSpec, TrajectoryRecord, linear_step, nonlinear_step, propagate
from .noise import NoiseDraw, StreamKey, draw_noise
from .observables import (
    EnsembleAccumulator,
    FilterSpec,
    NoiseReport,
    SpectralSample,
    accumulate,
    finalize,
    spectral_sample,
)
from .raman import RamanSpec, raman_drift, raman_noise
from .units import UnitMap, from_physical, to_physical, xi_to_zeta, zeta_to_xi

__all__ = [
    "DivergenceBudgetError",
    "EnsembleAccumulator",
    "EnsembleResult",
    "FieldPair",
    "FilterSpec",
    "NoiseDraw",
    "NoiseReport",
    "RamanSpec",
    "SimConfig",
    "SpectralSample",
    "StepperSpec",
    "StreamKey",
    "TRANSFORM_CONVENTION",
    "TimeGrid",
    "TrajectoryRecord",
    "UnitMap",
    "accumulate",
    "draw_noise",
    "finalize",
    "forward_transform",
    "from_physical",
    "gaussian_input",
    "inverse_transform",
    "linear_step",
    "make_grid",
    "nonlinear_step",
    "propagate",
    "raman_drift",
    "raman_noise",
    "run_ensemble",
    "sech_input",
    "spectral_sample",
    "to_physical",
    "xi_to_zeta",
    "zeta_to_xi",
]
