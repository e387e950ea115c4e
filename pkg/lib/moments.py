"""
Macroscopic fields of a discrete distribution: density, mean velocity,
temperature and pressure tensor.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .sym3 import SymTensor3
from .vgrid import LengthMismatch, VelocityGrid

logger = logging.getLogger(__name__)

VACUUM_DENSITY = 1e-14

# (i, j) component pairs in SymTensor3 entry order
_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


class VacuumState(Exception):
    """Raised when the density is too small for moments to be defined."""

    def __init__(self, density: float):
        self.density = density
        super().__init__(f"Density {density:.3e} is below {VACUUM_DENSITY:g}; moments undefined")


@dataclass(frozen=True, eq=False)
class Moments:
    """Density n, mean velocity u, temperature T and pressure tensor P."""

    n: float
    u: np.ndarray
    T: float
    P: SymTensor3

    def pressure_per_particle(self) -> SymTensor3:
        """P / n, in temperature units."""
        return self.P.scaled(1.0 / self.n)

    @classmethod
    def from_values(cls, n: float, u, T: float, P: SymTensor3 = None) -> 'Moments':
        """Moments of an isotropic (or given-P) state; P defaults to n T I."""
        if P is None:
            P = SymTensor3.identity(n * T)
        return cls(float(n), np.asarray(u, dtype=float).copy(), float(T), P)


def compute_moments(f: np.ndarray, grid: VelocityGrid, mass: float) -> Moments:
    """
    Moments of one species by grid quadrature.

    T is defined from the trace of P so trace(P) = 3 n T holds exactly.

    Raises:
        VacuumState: if n < 1e-14
        LengthMismatch: if f does not match the grid
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.size,):
        raise LengthMismatch(grid.size, f.size)

    n = float(grid.reduce(f))
    if not n >= VACUUM_DENSITY:
        raise VacuumState(n)

    v = grid.velocities
    u = grid.reduce(v.T * f) / n

    c = v - u
    products = np.stack([c[:, i] * c[:, j] for i, j in _PAIRS])
    p_entries = mass * grid.reduce(products * f)
    P = SymTensor3.from_entries(p_entries)
    T = P.trace() / (3.0 * n)
    return Moments(n, np.asarray(u, dtype=float), float(T), P)


def mixture_invariants(mom1: Moments, mom2: Moments,
                       m1: float, m2: float) -> Tuple[np.ndarray, float]:
    """
    Total momentum and total energy of the two species.

    Returns:
        (momentum 3-vector, energy)
    """
    momentum = m1 * mom1.n * mom1.u + m2 * mom2.n * mom2.u
    energy = 0.0
    for mom, mass in ((mom1, m1), (mom2, m2)):
        energy += 1.5 * mom.n * mom.T + 0.5 * mass * mom.n * float(np.dot(mom.u, mom.u))
    return momentum, float(energy)
