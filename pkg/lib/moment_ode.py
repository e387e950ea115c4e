"""
Closed moment system of the space-homogeneous model.

Every relaxation target is a Gaussian whose density, mean and second
moment are known in closed form, so n_k, n_k u_k and the second moment
W_k = integral of v v^T f_k close among themselves for all four variants.
The system is integrated with scipy and serves as an independent check on
the kinetic solver.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .closures import MixtureConfig, interspecies_parameters, self_tensor
from .moments import Moments
from .sym3 import SymTensor3, outer

logger = logging.getLogger(__name__)

_SPECIES_SIZE = 9  # momentum density (3) + second moment entries (6)


@dataclass(frozen=True)
class MomentTrajectory:
    times: np.ndarray
    species1: List[Moments]
    species2: List[Moments]

    def velocities(self, species: int) -> np.ndarray:
        """(len(times), 3) mean velocities of species 1 or 2."""
        moments = self.species1 if species == 1 else self.species2
        return np.array([m.u for m in moments])

    def temperatures(self, species: int) -> np.ndarray:
        moments = self.species1 if species == 1 else self.species2
        return np.array([m.T for m in moments])


def _pack(mom: Moments, mass: float) -> np.ndarray:
    second = mom.P.scaled(1.0 / mass) + outer(mom.u).scaled(mom.n)
    return np.concatenate([mom.n * mom.u, second.entries()])


def _unpack(block: np.ndarray, n: float, mass: float) -> Moments:
    u = block[:3] / n
    P = (SymTensor3.from_entries(block[3:]) - outer(u).scaled(n)).scaled(mass)
    return Moments(n, u, P.trace() / (3.0 * n), P)


def _target_block(n: float, u: np.ndarray, tensor: SymTensor3, mass: float) -> np.ndarray:
    second = tensor.scaled(n / mass) + outer(u).scaled(n)
    return np.concatenate([n * u, second.entries()])


def moment_rates(y: np.ndarray, densities: Tuple[float, float],
                 config: MixtureConfig) -> np.ndarray:
    """Time derivative of the packed moment vector."""
    n1, n2 = densities
    m1, m2 = config.m1, config.m2
    y1, y2 = y[:_SPECIES_SIZE], y[_SPECIES_SIZE:]
    mom1, mom2 = _unpack(y1, n1, m1), _unpack(y2, n2, m2)
    params = interspecies_parameters(mom1, mom2, config)

    self1 = _target_block(n1, mom1.u, self_tensor(mom1, config.mu1, config.variant), m1)
    self2 = _target_block(n2, mom2.u, self_tensor(mom2, config.mu2, config.variant), m2)
    inter12 = _target_block(n1, params.u12, params.tensor12, m1)
    inter21 = _target_block(n2, params.u21, params.tensor21, m2)

    rate1 = config.nu11 * n1 * (self1 - y1) + config.nu12 * n2 * (inter12 - y1)
    rate2 = config.nu22 * n2 * (self2 - y2) + config.nu21 * n1 * (inter21 - y2)
    return np.concatenate([rate1, rate2])


def integrate_moment_system(initial: Tuple[Moments, Moments], config: MixtureConfig,
                            times: Sequence[float], max_step: float = np.inf,
                            rtol: float = 1e-11, atol: float = 1e-13) -> MomentTrajectory:
    """
    Integrate the closed moment system and sample it at `times`.

    Args:
        initial: moments of species 1 and 2 at times[0]
        config: model parameters (any variant)
        times: ascending output times; the first is the initial time
        max_step: cap on the integrator step

    Raises:
        RuntimeError: if the integrator fails
    """
    mom1, mom2 = initial
    densities = (mom1.n, mom2.n)
    times = np.asarray(times, dtype=float)
    y0 = np.concatenate([_pack(mom1, config.m1), _pack(mom2, config.m2)])

    solution = solve_ivp(lambda t, y: moment_rates(y, densities, config),
                         (times[0], times[-1]), y0, method='RK45', t_eval=times,
                         max_step=max_step, rtol=rtol, atol=atol)
    if not solution.success:
        raise RuntimeError(f"Moment system integration failed: {solution.message}")
    logger.debug(f"Moment system: {solution.nfev} evaluations over {len(times)} samples")

    first = [_unpack(col[:_SPECIES_SIZE], densities[0], config.m1) for col in solution.y.T]
    second = [_unpack(col[_SPECIES_SIZE:], densities[1], config.m2) for col in solution.y.T]
    return MomentTrajectory(solution.t, first, second)
