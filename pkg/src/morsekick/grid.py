"""Uniform position grid, wavefunctions on it, and the elementary spectral operations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft


class GridMismatchError(ValueError):
    """Two wavefunctions do not live on the same grid."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of ``n_points`` positions on [x_min, x_max).

    The right endpoint is excluded so the grid is periodic-FFT compatible;
    the conjugate momentum lattice spans [-pi/dx, pi/dx) with spacing
    2*pi/(n_points*dx).
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.x_max <= self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        n = self.n_points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> np.ndarray:
        """Position samples x_j = x_min + j*dx, j = 0..n_points-1."""
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def momenta(self) -> np.ndarray:
        """Momentum lattice in FFT bin order (hbar = 1)."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


def make_grid(x_min: float, x_max: float, n_points: int) -> GridSpec:
    """Validate and build the grid specification."""
    return GridSpec(float(x_min), float(x_max), int(n_points))


@dataclass
class Wavefunction:
    """Complex amplitudes on a grid, normalized so that sum(|psi|^2)*dx = 1
    for a bound state."""

    grid: GridSpec
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n_points,):
            raise ValueError(
                f"amplitudes shape {amps.shape} does not match grid "
                f"({self.grid.n_points} points)"
            )
        self.amplitudes = amps

    def copy(self) -> "Wavefunction":
        return Wavefunction(self.grid, self.amplitudes.copy())


def _require_same_grid(a: Wavefunction, b: Wavefunction) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def inner_product(a: Wavefunction, b: Wavefunction) -> complex:
    """<a|b> = sum(conj(a_i) * b_i) * dx."""
    _require_same_grid(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.dx)


def norm_squared(psi: Wavefunction) -> float:
    """<psi|psi>, always real and >= 0."""
    amps = psi.amplitudes
    return float(np.real(np.vdot(amps, amps)) * psi.grid.dx)


def to_momentum(psi: Wavefunction) -> Wavefunction:
    """Unitary DFT to the momentum representation (bins ordered as ``grid.momenta``)."""
    return Wavefunction(psi.grid, sfft.fft(psi.amplitudes, norm="ortho"))


def to_position(psi_p: Wavefunction) -> Wavefunction:
    """Inverse of :func:`to_momentum`."""
    return Wavefunction(psi_p.grid, sfft.ifft(psi_p.amplitudes, norm="ortho"))


def expectation_x(psi: Wavefunction) -> float:
    """<x> for a (not necessarily normalized) wavefunction."""
    amps = psi.amplitudes
    w = float(np.real(np.vdot(amps, amps)))
    if w == 0.0:
        return 0.0
    return float(np.real(np.vdot(amps, psi.grid.x * amps)) / w)


def expectation_p(psi: Wavefunction) -> float:
    """<p> evaluated spectrally (hbar = 1)."""
    amps_p = sfft.fft(psi.amplitudes, norm="ortho")
    w = float(np.real(np.vdot(amps_p, amps_p)))
    if w == 0.0:
        return 0.0
    return float(np.real(np.vdot(amps_p, psi.grid.momenta * amps_p)) / w)
