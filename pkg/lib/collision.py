"""
Right-hand sides of the four relaxation models as fields over the
velocity grid, plus the mixture state that caches moments and targets.
"""
import logging
from dataclasses import dataclass
from threading import Lock
from typing import Dict, Tuple

import numpy as np

from .closures import (InterspeciesParameters, MixtureConfig, build_gaussian,
                       build_maxwellian, interspecies_parameters, tensor_single)
from .moments import Moments, compute_moments
from .vgrid import LengthMismatch, VelocityGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RelaxationTargets:
    """The four target fields for one state and one configuration."""

    self1: np.ndarray
    self2: np.ndarray
    inter12: np.ndarray
    inter21: np.ndarray
    params: InterspeciesParameters


class MixtureState:
    """
    Two distribution fields on one velocity grid.

    Moments and targets are cached against a version counter that every
    update() bumps. Reads may run concurrently; update() needs exclusive
    access to the state.
    """

    def __init__(self, grid: VelocityGrid, f1: np.ndarray, f2: np.ndarray,
                 m1: float, m2: float):
        self.grid = grid
        self.m1 = float(m1)
        self.m2 = float(m2)
        self.version = 0
        self._lock = Lock()
        self._moments = None
        self._targets: Dict[Tuple[int, MixtureConfig], RelaxationTargets] = {}
        self._f1, self._f2 = self._checked(f1), self._checked(f2)

    def _checked(self, f: np.ndarray) -> np.ndarray:
        f = np.array(f, dtype=float)
        if f.shape != (self.grid.size,):
            raise LengthMismatch(self.grid.size, f.size)
        f.setflags(write=False)
        return f

    @property
    def f1(self) -> np.ndarray:
        return self._f1

    @property
    def f2(self) -> np.ndarray:
        return self._f2

    @property
    def fields(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._f1, self._f2

    def update(self, f1: np.ndarray, f2: np.ndarray):
        """Replace both fields and invalidate every cache."""
        f1, f2 = self._checked(f1), self._checked(f2)
        with self._lock:
            self._f1, self._f2 = f1, f2
            self.version += 1
            self._moments = None
            self._targets.clear()
        logger.debug(f"State updated to version {self.version}")

    def with_fields(self, f1: np.ndarray, f2: np.ndarray) -> 'MixtureState':
        """New state on the same grid and masses."""
        return MixtureState(self.grid, f1, f2, self.m1, self.m2)

    def moments(self) -> Tuple[Moments, Moments]:
        with self._lock:
            if self._moments is None:
                self._moments = (compute_moments(self._f1, self.grid, self.m1),
                                 compute_moments(self._f2, self.grid, self.m2))
            return self._moments

    def targets(self, config: MixtureConfig) -> RelaxationTargets:
        key = (self.version, config)
        with self._lock:
            cached = self._targets.get(key)
        if cached is not None:
            return cached
        targets = build_targets(self, config)
        with self._lock:
            if key[0] == self.version:
                self._targets[key] = targets
        return targets


def build_targets(state: MixtureState, config: MixtureConfig) -> RelaxationTargets:
    """
    Rebuild all four targets from the current moments.

    BGK -> (M1, M12); ES_SINGLE -> (G1, M12); ES_FULL_A/B -> (G1, G12).
    """
    if (config.m1, config.m2) != (state.m1, state.m2):
        raise ValueError(f"Config masses {(config.m1, config.m2)} do not match "
                         f"state masses {(state.m1, state.m2)}")

    mom1, mom2 = state.moments()
    params = interspecies_parameters(mom1, mom2, config)
    grid, exact = state.grid, config.mass_exact
    variant = config.variant

    if variant.uses_self_tensor:
        self1 = build_gaussian(mom1.n, mom1.u, tensor_single(mom1, config.mu1), state.m1, grid, exact)
        self2 = build_gaussian(mom2.n, mom2.u, tensor_single(mom2, config.mu2), state.m2, grid, exact)
    else:
        self1 = build_maxwellian(mom1.n, mom1.u, mom1.T, state.m1, grid, exact)
        self2 = build_maxwellian(mom2.n, mom2.u, mom2.T, state.m2, grid, exact)

    if variant.uses_interspecies_tensor:
        inter12 = build_gaussian(mom1.n, params.u12, params.tensor12, state.m1, grid, exact)
        inter21 = build_gaussian(mom2.n, params.u21, params.tensor21, state.m2, grid, exact)
    else:
        inter12 = build_maxwellian(mom1.n, params.u12, params.T12, state.m1, grid, exact)
        inter21 = build_maxwellian(mom2.n, params.u21, params.T21, state.m2, grid, exact)

    return RelaxationTargets(self1, self2, inter12, inter21, params)


def rhs(state: MixtureState, config: MixtureConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Collision terms of both species.

    Species 1: nu11 n1 (target1 - f1) + nu12 n2 (target12 - f1), and
    symmetrically for species 2.
    """
    mom1, mom2 = state.moments()
    targets = state.targets(config)
    f1, f2 = state.fields
    n1, n2 = mom1.n, mom2.n

    r1 = config.nu11 * n1 * (targets.self1 - f1) + config.nu12 * n2 * (targets.inter12 - f1)
    r2 = config.nu22 * n2 * (targets.self2 - f2) + config.nu21 * n1 * (targets.inter21 - f2)
    return r1, r2


def total_collision_rate(state: MixtureState, config: MixtureConfig) -> float:
    """Largest total relaxation rate over the two species."""
    mom1, mom2 = state.moments()
    rate1 = config.nu11 * mom1.n + config.nu12 * mom2.n
    rate2 = config.nu22 * mom2.n + config.nu21 * mom1.n
    return max(rate1, rate2)


@dataclass(frozen=True, eq=False)
class CollisionRates:
    mass1: float
    mass2: float
    momentum: np.ndarray
    energy: float


def collision_invariants_residual(state: MixtureState, config: MixtureConfig) -> CollisionRates:
    """Rates of change of species masses, total momentum and total energy."""
    r1, r2 = rhs(state, config)
    grid = state.grid
    v = grid.velocities
    speed_sq = np.sum(v * v, axis=1)

    momentum = np.zeros(3)
    energy = 0.0
    for r, mass in ((r1, state.m1), (r2, state.m2)):
        momentum += mass * grid.reduce(v.T * r)
        energy += 0.5 * mass * float(grid.reduce(speed_sq * r))

    return CollisionRates(float(grid.reduce(r1)), float(grid.reduce(r2)), momentum, energy)
