"""Uniform periodic time grid and the project-wide Fourier convention.

The simulation lives on a dimensionless time grid tau in [-tau_window,
tau_window) with a matched angular-frequency grid.  One transform
convention is used everywhere and recorded in output metadata:

    forward:  F(omega) = (1/sqrt(2*pi)) * integral f(tau) exp(-i omega tau) dtau
    inverse:  f(tau)   = (1/sqrt(2*pi)) * integral F(omega) exp(+i omega tau) domega

discretised with numpy's FFT (the extra phase from the grid origin at
tau = -tau_window is carried explicitly).  With this normalisation the
discrete transform is unitary in the Riemann-sum sense:

    sum_k |F(omega_k)|^2 * d_omega  ==  sum_j |f(tau_j)|^2 * d_tau
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRANSFORM_CONVENTION = "forward exp(-i*omega*tau)/sqrt(2pi); numpy fft order"


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Uniform tau grid with its discrete frequency grid.

    Attributes:
        n_points: number of samples, a power of two.
        tau_window: half-width; the grid spans [-tau_window, tau_window).
        d_tau: sample spacing, 2*tau_window/n_points.
        tau: sample positions.
        omega: angular frequencies in numpy fft order (spacing pi/tau_window).
        nu: ordinary frequencies omega/(2*pi), fft order.
        d_omega: angular frequency spacing.
    """

    n_points: int
    tau_window: float
    d_tau: float = field(init=False)
    d_omega: float = field(init=False)
    tau: np.ndarray = field(init=False, repr=False)
    omega: np.ndarray = field(init=False, repr=False)
    nu: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.n_points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")
        if not self.tau_window > 0:
            raise ValueError(f"tau_window must be positive, got {self.tau_window}")
        d_tau = 2.0 * self.tau_window / n
        object.__setattr__(self, "d_tau", d_tau)
        object.__setattr__(self, "d_omega", 2.0 * np.pi / (n * d_tau))
        object.__setattr__(self, "tau", -self.tau_window + d_tau * np.arange(n))
        omega = 2.0 * np.pi * np.fft.fftfreq(n, d=d_tau)
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        nu = omega / (2.0 * np.pi)
        nu.setflags(write=False)
        object.__setattr__(self, "nu", nu)
        self.tau.setflags(write=False)

    @property
    def negated_index(self) -> np.ndarray:
        """Index array mapping bin k to the bin holding -omega_k.

        The Nyquist bin (n/2) maps to itself.
        """
        return (-np.arange(self.n_points)) % self.n_points

    def metadata(self) -> dict:
        return {
            "n_points": self.n_points,
            "tau_window": self.tau_window,
            "d_tau": self.d_tau,
            "transform": TRANSFORM_CONVENTION,
        }


def make_grid(n_points: int, tau_window: float) -> TimeGrid:
    """Build a TimeGrid; see the module docstring for the transform convention."""
    return TimeGrid(n_points=int(n_points), tau_window=float(tau_window))


def forward_transform(values: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Continuum-normalised forward transform (tau -> omega), fft bin order.

    Works on the last axis, so batches of fields transform in one call.
    """
    phase = np.exp(1j * grid.omega * grid.tau_window)
    return (grid.d_tau / np.sqrt(2.0 * np.pi)) * phase * np.fft.fft(values, axis=-1)


def inverse_transform(spectrum: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Inverse of :func:`forward_transform`."""
    phase = np.exp(-1j * grid.omega * grid.tau_window)
    scale = grid.d_omega * grid.n_points / np.sqrt(2.0 * np.pi)
    return scale * np.fft.ifft(spectrum * phase, axis=-1)
