"""Morse potential, its analytic spectrum, and the numerical bound-state basis.

All quantities are in atomic units (hbar = 1); energies use the convention
that the well bottom sits at -De and the dissociation threshold at 0, so
"bound" is literally "negative energy".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
import scipy.linalg as sla

from .grid import GridSpec, Wavefunction


class GridTooSmallError(ValueError):
    """The grid does not support all analytically expected bound states."""


@dataclass(frozen=True)
class MorseParams:
    """Molecular constants: reduced mass m, well depth De, inverse length beta."""

    m: float
    De: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("m", "De", "beta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.B < 2:
            raise ValueError(f"derived anharmonicity B={self.B} outside (0, 2): no bound state")

    @property
    def B(self) -> float:
        """Dimensionless anharmonicity, beta / sqrt(2*m*De)."""
        return self.beta / math.sqrt(2.0 * self.m * self.De)

    @property
    def omega_e(self) -> float:
        """Harmonic frequency, 2*B*De."""
        return 2.0 * self.B * self.De

    @property
    def j(self) -> float:
        return 1.0 / self.B - 0.5

    @property
    def n_bound(self) -> int:
        """Number of bound states, floor(j) + 1."""
        return int(math.floor(self.j)) + 1


# Literature Morse constants; the simulations in this package default to HF.
MOLECULES: dict[str, MorseParams] = {
    "hf": MorseParams(m=1744.59, De=0.225, beta=1.1741),
    "hcl": MorseParams(m=1786.6, De=0.1697, beta=0.9886),
    "h2": MorseParams(m=918.076, De=0.1745, beta=1.0277),
}


def morse_potential(params: MorseParams, x: np.ndarray | float) -> np.ndarray | float:
    """V(x) = -De + De*(1 - exp(-beta*x))^2, with x the bond stretch."""
    return -params.De + params.De * (1.0 - np.exp(-params.beta * np.asarray(x, float))) ** 2


def analytic_energy(params: MorseParams, n: int) -> float:
    """Closed-form bound-state energy for level n, threshold at zero.

    The textbook formula measures energies from the well bottom; the -De shift
    puts them on the same scale as :func:`morse_potential`.
    """
    if n < 0 or n > math.floor(params.j):
        raise ValueError(
            f"level n={n} outside the bound spectrum (0..{math.floor(params.j)})"
        )
    half = n + 0.5
    return params.omega_e * half * (1.0 - params.B * half / 2.0) - params.De


def kinetic_matrix(grid: GridSpec, mass: float) -> np.ndarray:
    """Dense real-symmetric kinetic matrix of the periodic spectral Laplacian.

    Built as the circulant whose eigenvalues are p^2/(2m) on the FFT momentum
    lattice, i.e. bit-consistent with the split-operator kinetic step.
    """
    kin = grid.momenta**2 / (2.0 * mass)
    row = sfft.ifft(kin)
    return sla.circulant(row.real)


@dataclass
class BoundStateBasis:
    """Orthonormal negative-energy eigenstates of the grid Hamiltonian."""

    params: MorseParams
    grid: GridSpec
    states: list[Wavefunction]
    energies: list[float]

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def state_matrix(self) -> np.ndarray:
        """(n_states, n_points) array view of the basis, for batched projections."""
        return np.asarray([s.amplitudes for s in self.states])


def solve_bound_states(
    params: MorseParams,
    grid: GridSpec,
    potential_tail_tol: float = 1e-3,
) -> BoundStateBasis:
    """Diagonalize the grid Hamiltonian and keep the negative-energy states.

    Raises GridTooSmallError when the box is too small to hold every state the
    analytic level count promises, or when V has not decayed at the outer edge.
    """
    v = morse_potential(params, grid.x)
    if abs(v[-1]) > potential_tail_tol:
        raise GridTooSmallError(
            f"potential at grid edge is {v[-1]:.3e}; grid does not reach the "
            f"asymptotic region (|V| tolerance {potential_tail_tol:g})"
        )
    h = kinetic_matrix(grid, params.m)
    h[np.diag_indices_from(h)] += v
    energies, vecs = sla.eigh(h)

    n_neg = int(np.sum(energies < 0.0))
    n_b = params.n_bound
    if n_neg < n_b:
        raise GridTooSmallError(
            f"found {n_neg} negative-energy states but the spectrum has {n_b}; "
            "enlarge the grid"
        )

    dx = grid.dx
    states = []
    for nu in range(n_b):
        vec = vecs[:, nu]
        # Fix the arbitrary eigenvector sign so bases are reproducible run to run.
        if vec[np.argmax(np.abs(vec))] < 0:
            vec = -vec
        states.append(Wavefunction(grid, (vec / math.sqrt(dx)).astype(np.complex128)))
    return BoundStateBasis(params, grid, states, [float(e) for e in energies[:n_b]])
