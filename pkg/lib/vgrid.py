"""
Truncated 3D velocity lattice and the quadrature that realizes every
velocity integral of the model.

Node ordering (used by dumps): index = (iz * N + iy) * N + ix, ix fastest.
"""
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MIN_POINTS = 9
DEFAULT_POINTS = 33
DEFAULT_SAFETY = 7.0


class BadResolution(Exception):
    """Raised when the per-axis point count is even or below 9."""


class LengthMismatch(Exception):
    """Raised when a field does not match its grid."""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Field has {actual} values, grid has {expected} nodes")


@dataclass(frozen=True, eq=False)
class VelocityGrid:
    """Cubic velocity grid on [-V, V]^3 with trapezoid weights"""

    extent: float
    points: int
    deterministic: bool = False
    spacing: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)
    velocities: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.points
        h = 2.0 * self.extent / (n - 1)
        half = (n - 1) // 2
        # integer offsets keep the nodes exactly symmetric about 0
        nodes = h * np.arange(-half, half + 1, dtype=float)

        axis_weights = np.full(n, h)
        axis_weights[0] = axis_weights[-1] = 0.5 * h

        vz, vy, vx = np.meshgrid(nodes, nodes, nodes, indexing='ij')
        velocities = np.stack([vx.ravel(), vy.ravel(), vz.ravel()], axis=1)
        wz, wy, wx = np.meshgrid(axis_weights, axis_weights, axis_weights, indexing='ij')
        weights = (wx * wy * wz).ravel()

        for name, value in (('spacing', h), ('nodes', nodes),
                            ('velocities', velocities), ('weights', weights)):
            object.__setattr__(self, name, value)
        for array in (nodes, velocities, weights):
            array.setflags(write=False)

    @property
    def size(self) -> int:
        return self.points ** 3

    def node_index(self, ix: int, iy: int, iz: int) -> int:
        return (iz * self.points + iy) * self.points + ix

    def reduce(self, integrand: np.ndarray) -> np.ndarray:
        """
        Quadrature over the last axis of integrand.

        In deterministic mode the sum is numpy's pairwise reduction of the
        weighted products (fixed order); otherwise a BLAS dot is used.
        """
        if self.deterministic:
            return np.sum(integrand * self.weights, axis=-1)
        return integrand @ self.weights

    def with_deterministic(self, deterministic: bool) -> 'VelocityGrid':
        if deterministic == self.deterministic:
            return self
        return VelocityGrid(self.extent, self.points, deterministic)


def build_grid(extent: float, points: int = DEFAULT_POINTS,
               deterministic: bool = False) -> VelocityGrid:
    """
    Build a cubic velocity grid.

    Args:
        extent: half-width V > 0 of every axis
        points: odd per-axis node count N >= 9
        deterministic: use the fixed-order reduction

    Raises:
        BadResolution: if N is even or below 9
    """
    if points < MIN_POINTS or points % 2 == 0:
        raise BadResolution(f"Grid needs an odd point count >= {MIN_POINTS}, got {points}")
    if not extent > 0:
        raise BadResolution(f"Grid extent must be positive, got {extent}")
    grid = VelocityGrid(float(extent), int(points), deterministic)
    logger.debug(f"Built velocity grid V={extent:g} N={points} h={grid.spacing:g}")
    return grid


def auto_extent(moments: Iterable, masses: Sequence[float],
                safety: float = DEFAULT_SAFETY) -> float:
    """
    Pick V so every species is covered by `safety` thermal widths.

    V = max over species of (max |u_i| + safety * sqrt(T / m)).
    """
    extent = 0.0
    for mom, mass in zip(moments, masses):
        drift = float(np.max(np.abs(mom.u)))
        extent = max(extent, drift + safety * np.sqrt(mom.T / mass))
    return float(extent)


def integrate(values: np.ndarray, grid: VelocityGrid) -> float:
    """Quadrature of one grid field."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise LengthMismatch(grid.size, values.size)
    return float(grid.reduce(values))
