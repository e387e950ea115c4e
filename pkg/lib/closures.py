"""
Relaxation targets of the mixture model: Maxwellians, anisotropic
Gaussians, and the interspecies closure parameters with their
admissibility checks.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .moments import Moments, VacuumState
from .sym3 import (SymTensor3, det, inverse, is_positive_definite,
                   quadratic_form, require_positive_definite)
from .vgrid import VelocityGrid

logger = logging.getLogger(__name__)

MU_MIN = -0.5
MU_MAX = 1.0
ROOT_TOLERANCE = 1e-12
RESTRICTION_TOLERANCE = 1e-10


class ModelVariant(str, Enum):
    BGK = 'BGK'
    ES_SINGLE = 'ES_SINGLE'
    ES_FULL_A = 'ES_FULL_A'
    ES_FULL_B = 'ES_FULL_B'

    @property
    def uses_self_tensor(self) -> bool:
        return self is not ModelVariant.BGK

    @property
    def uses_interspecies_tensor(self) -> bool:
        return self in (ModelVariant.ES_FULL_A, ModelVariant.ES_FULL_B)


class NonpositiveTemperature(Exception):
    """Raised when an interspecies temperature comes out <= 0."""

    def __init__(self, parameter: str, value: float):
        self.parameter = parameter
        self.value = value
        super().__init__(f"{parameter} = {value:.6g} is not positive; "
                         f"parameters are outside the validated window")


class NoAdmissibleMu21(Exception):
    """Raised when no root of the mu21 restriction gives a valid T21 tensor."""

    def __init__(self, roots: Sequence[float], message: str = ""):
        self.roots = list(roots)
        super().__init__(message or f"No admissible mu21 among roots {self.roots}")


@dataclass(frozen=True)
class MixtureConfig:
    """
    Masses, collision frequencies and free parameters of the two-species model.

    nu21 = nu12 / epsilon, nu11 = beta1 * nu12, nu22 = beta2 * nu21 unless
    nu11_override / nu22_override are given. mu12 / mu21 of None mean
    "use the restriction value for the current densities".
    """

    m1: float = 1.0
    m2: float = 1.0
    epsilon: float = 1.0
    beta1: float = 1.0
    beta2: float = 1.0
    nu12: float = 1.0
    delta: float = 0.5
    alpha: float = 0.5
    gamma: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    mu12: Optional[float] = None
    mu21: Optional[float] = None
    variant: ModelVariant = ModelVariant.BGK
    nu11_override: Optional[float] = None
    nu22_override: Optional[float] = None
    mass_exact: bool = True

    @property
    def nu21(self) -> float:
        return self.nu12 / self.epsilon

    @property
    def nu11(self) -> float:
        if self.nu11_override is not None:
            return self.nu11_override
        return self.beta1 * self.nu12

    @property
    def nu22(self) -> float:
        if self.nu22_override is not None:
            return self.nu22_override
        return self.beta2 * self.nu21

    @property
    def mass_ratio(self) -> float:
        """epsilon * m1 / m2, the combination every positivity bound uses."""
        return self.epsilon * self.m1 / self.m2

    @property
    def is_collisionless(self) -> bool:
        return self.nu12 == 0 and self.nu11 == 0 and self.nu22 == 0


@dataclass(frozen=True)
class ConfigViolation:
    parameter: str
    bound: str
    value: float

    def __str__(self) -> str:
        return f"{self.parameter} = {self.value:g} violates {self.bound}"


def delta_lower_bound(config: MixtureConfig) -> float:
    r = config.mass_ratio
    return (r - 1.0) / (1.0 + r)


def gamma_upper_bound(config: MixtureConfig) -> float:
    r = config.mass_ratio
    d = config.delta
    return (config.m1 / 3.0) * (1.0 - d) * ((1.0 + r) * d + 1.0 - r)


def _drift_coefficient(m1: float, m2: float, epsilon: float, delta: float, gamma: float) -> float:
    return (epsilon * m1 / 3.0 * (1.0 - delta)
            * (m1 / m2 * epsilon * (delta - 1.0) + delta + 1.0)
            - epsilon * gamma)


def drift_coefficient_21(config: MixtureConfig) -> float:
    """Coefficient of |u1 - u2|^2 in T21 (and in the T21 tensor)."""
    return _drift_coefficient(config.m1, config.m2, config.epsilon, config.delta, config.gamma)


def validate_config(config: MixtureConfig,
                    densities: Optional[Tuple[float, float]] = None) -> List[ConfigViolation]:
    """
    Check every parameter window of the model.

    Args:
        config: parameters to check
        densities: (n1, n2); when given, the ES_FULL_A restrictions on
            mu12 / mu21 are checked as well

    Returns:
        List of violations (empty when the configuration is valid)
    """
    found: List[ConfigViolation] = []

    def check(ok: bool, parameter: str, bound: str, value: float):
        if not ok:
            found.append(ConfigViolation(parameter, bound, value))

    c = config
    check(c.m1 > 0, 'm1', 'm1 > 0', c.m1)
    check(c.m2 > 0, 'm2', 'm2 > 0', c.m2)
    check(0 < c.epsilon <= 1, 'epsilon', 'epsilon in (0, 1]', c.epsilon)
    check(c.beta1 > 0, 'beta1', 'beta1 > 0', c.beta1)
    check(c.beta2 > 0, 'beta2', 'beta2 > 0', c.beta2)

    explicit_self = c.nu11_override is not None and c.nu22_override is not None
    if explicit_self:
        check(c.nu12 >= 0, 'nu12', 'nu12 >= 0', c.nu12)
        check(c.nu11 >= 0, 'nu11', 'nu11 >= 0', c.nu11)
        check(c.nu22 >= 0, 'nu22', 'nu22 >= 0', c.nu22)
    else:
        check(c.nu12 > 0, 'nu12', 'nu12 > 0', c.nu12)

    check(0 <= c.alpha <= 1, 'alpha', 'alpha in [0, 1]', c.alpha)

    # positivity windows only make sense for admissible masses and epsilon
    if c.m1 > 0 and c.m2 > 0 and 0 < c.epsilon <= 1:
        low = delta_lower_bound(c)
        check(low <= c.delta <= 1, 'delta', f'delta in [{low:.6g}, 1]', c.delta)
        high = gamma_upper_bound(c)
        check(0 <= c.gamma <= high, 'gamma', f'gamma in [0, {high:.6g}]', c.gamma)

    if c.variant.uses_self_tensor:
        check(MU_MIN <= c.mu1 <= MU_MAX, 'mu1', 'mu1 in [-1/2, 1]', c.mu1)
        check(MU_MIN <= c.mu2 <= MU_MAX, 'mu2', 'mu2 in [-1/2, 1]', c.mu2)

    if c.variant is ModelVariant.ES_FULL_A and densities is not None and not found:
        n1, n2 = densities
        forced = mu12_restriction(c, n1, n2)
        if c.mu12 is not None:
            check(abs(c.mu12 - forced) <= RESTRICTION_TOLERANCE * max(1.0, abs(forced)),
                  'mu12', f'mu12 = {forced:.6g} (restriction)', c.mu12)
        if c.mu21 is not None:
            residual = mu21_restriction_residual(c, n1, n2, c.mu21)
            check(abs(residual) <= RESTRICTION_TOLERANCE, 'mu21',
                  'mu21 solves the quadratic restriction', c.mu21)
        else:
            try:
                solve_mu21_restriction(c, n1, n2)
            except NoAdmissibleMu21 as e:
                found.append(ConfigViolation('mu21', f'an admissible root in [0, 1] (roots {e.roots})',
                                             float('nan')))

    for violation in found:
        logger.warning(f"Config violation: {violation}")
    return found


def interspecies_velocity_12(u1, u2, delta: float) -> np.ndarray:
    """u12 = delta u1 + (1 - delta) u2."""
    return delta * np.asarray(u1, dtype=float) + (1.0 - delta) * np.asarray(u2, dtype=float)


def interspecies_velocity_21(u1, u2, delta: float, epsilon: float,
                             m1: float, m2: float) -> np.ndarray:
    """u21 = u2 - (m1/m2) epsilon (1 - delta) (u2 - u1)."""
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    return u2 - (m1 / m2) * epsilon * (1.0 - delta) * (u2 - u1)


def interspecies_temperature_12(T1: float, T2: float, alpha: float, gamma: float,
                                gap_u_sq: float) -> float:
    """T12 = alpha T1 + (1 - alpha) T2 + gamma |u1 - u2|^2."""
    value = alpha * T1 + (1.0 - alpha) * T2 + gamma * gap_u_sq
    if not value > 0:
        raise NonpositiveTemperature('T12', value)
    return value


def interspecies_temperature_21(T1: float, T2: float, alpha: float, gamma: float,
                                delta: float, epsilon: float, m1: float, m2: float,
                                gap_u_sq: float) -> float:
    """T21 from conservation of total energy (pairs with T12 above)."""
    drift = _drift_coefficient(m1, m2, epsilon, delta, gamma)
    w = epsilon * (1.0 - alpha)
    value = drift * gap_u_sq + w * T1 + (1.0 - w) * T2
    if not value > 0:
        raise NonpositiveTemperature('T21', value)
    return value


def _sample(n: float, u, cov_inv: SymTensor3, cov_det: float,
            grid: VelocityGrid, mass_exact: bool) -> np.ndarray:
    c = grid.velocities - np.asarray(u, dtype=float)
    values = np.exp(-0.5 * quadratic_form(cov_inv, c))
    values *= n / math.sqrt((2.0 * math.pi) ** 3 * cov_det)
    if mass_exact:
        discrete = float(grid.reduce(values))
        if not discrete > 0:
            # the grid misses the distribution entirely
            raise VacuumState(discrete)
        values *= n / discrete
    return values


def build_maxwellian(n: float, u, T: float, m: float, grid: VelocityGrid,
                     mass_exact: bool = False) -> np.ndarray:
    """
    Sample n / (2 pi T/m)^(3/2) exp(-|v - u|^2 / (2 T/m)) on the grid.

    Args:
        mass_exact: rescale the amplitude so the discrete density equals n
    """
    if not n > 0:
        raise ValueError(f"Density must be positive, got {n}")
    if not T > 0:
        raise NonpositiveTemperature('T', T)
    variance = T / m
    return _sample(n, u, SymTensor3.identity(1.0 / variance), variance ** 3, grid, mass_exact)


def build_gaussian(n: float, u, tensor: SymTensor3, m: float, grid: VelocityGrid,
                   mass_exact: bool = False) -> np.ndarray:
    """
    Sample the anisotropic Gaussian with covariance tensor / m.

    Raises:
        SingularTensor: if the tensor is not positive-definite or not invertible
    """
    require_positive_definite(tensor, "relaxation tensor")
    covariance = tensor.scaled(1.0 / m)
    return _sample(n, u, inverse(covariance), det(covariance), grid, mass_exact)


def entropy_of_gaussian(n: float, tensor: SymTensor3, m: float) -> float:
    """Closed form of the integral of G ln G for the Gaussian (n, tensor, m)."""
    scaled_det = (2.0 * math.pi / m) ** 3 * det(tensor)
    return n * math.log(n / math.sqrt(scaled_det)) - 1.5 * n


def tensor_single(moments: Moments, mu: float) -> SymTensor3:
    """(1 - mu) T I + mu P / n."""
    return moments.pressure_per_particle().scaled(mu).shifted((1.0 - mu) * moments.T)


def mu12_restriction(config: MixtureConfig, n1: float, n2: float) -> float:
    """mu12 forced by the equilibrium condition of the first ES extension."""
    return 1.0 + (1.0 - config.mu1) * (n1 / n2) * (config.nu11 / config.nu12)


def _mu21_coefficients(config: MixtureConfig, n1: float, n2: float) -> Tuple[float, float, float]:
    """(q2, q1, q0) of the mu21 restriction, without the overall 1/n1^2."""
    c = config
    alpha, eps = c.alpha, c.epsilon
    nu12, nu22 = c.nu12, c.nu22
    mu12 = c.mu12 if c.mu12 is not None else mu12_restriction(c, n1, n2)

    a1 = (1.0 / eps - 1.0 + alpha) * n1 * nu12
    a0 = (c.mu2 - 1.0) * n2 * nu22
    b1 = n1 * nu12 * ((alpha - 1.0) * n1 + n2 / eps)
    b0 = -n1 * nu12 * n2 / eps + (c.mu2 - 1.0) * n2 ** 2 * nu22
    k = n1 / n2 ** 2
    constant = -((alpha - 1.0) ** 2) * mu12 ** 2 * n2 ** 2 * nu12 ** 2
    return k * a1 * b1, k * (a1 * b0 + a0 * b1), k * a0 * b0 + constant


def mu21_restriction_residual(config: MixtureConfig, n1: float, n2: float, mu21: float) -> float:
    """Left side of the mu21 restriction (zero for an exact root)."""
    q2, q1, q0 = _mu21_coefficients(config, n1, n2)
    return (q2 * mu21 ** 2 + q1 * mu21 + q0) / n1 ** 2


def mu21_roots(config: MixtureConfig, n1: float, n2: float) -> List[float]:
    """All real roots of the mu21 restriction, ascending."""
    q2, q1, q0 = _mu21_coefficients(config, n1, n2)
    scale = max(abs(q1), abs(q0), 1e-300)
    if abs(q2) <= 1e-14 * scale:
        if q1 == 0:
            return []
        return [-q0 / q1]

    disc = q1 * q1 - 4.0 * q2 * q0
    if disc < 0:
        return []
    # cancellation-free form of the quadratic formula
    q = -0.5 * (q1 + math.copysign(math.sqrt(disc), q1))
    if q == 0:
        return [0.0, 0.0]
    return sorted([q / q2, q0 / q])


def solve_mu21_restriction(config: MixtureConfig, n1: float, n2: float) -> float:
    """
    Root of the mu21 restriction with non-negative T21 coefficients
    (0 <= mu21 <= 1); ties go to the smaller |mu21|.

    Raises:
        NoAdmissibleMu21: if no real root qualifies
    """
    roots = mu21_roots(config, n1, n2)
    admissible = [r for r in roots if -ROOT_TOLERANCE <= r <= 1.0 + ROOT_TOLERANCE]
    if not admissible:
        raise NoAdmissibleMu21(roots)
    chosen = min(admissible, key=abs)
    logger.debug(f"mu21 roots {roots}, selected {chosen}")
    return chosen


def tensor_interspecies_A(mom1: Moments, mom2: Moments,
                          config: MixtureConfig) -> Tuple[SymTensor3, SymTensor3]:
    """
    Interspecies tensors of the first full extension.

    Each pressure tensor is normalized by its own density, so the traces
    reproduce T12 and T21.

    Raises:
        NoAdmissibleMu21: if mu21 has no admissible root or T21 is not positive-definite
        SingularTensor: if T12 is not positive-definite
    """
    c = config
    gap_u_sq = float(np.sum((mom1.u - mom2.u) ** 2))
    mu12 = c.mu12 if c.mu12 is not None else mu12_restriction(c, mom1.n, mom2.n)
    mu21 = c.mu21 if c.mu21 is not None else solve_mu21_restriction(c, mom1.n, mom2.n)

    p1 = mom1.pressure_per_particle()
    p2 = mom2.pressure_per_particle()

    mixed_T1 = c.alpha * mom1.T + (1.0 - c.alpha) * mom2.T
    mixed_P1 = p1.scaled(c.alpha) + p2.scaled(1.0 - c.alpha)
    tensor12 = mixed_P1.scaled(mu12).shifted((1.0 - mu12) * mixed_T1 + c.gamma * gap_u_sq)

    w = c.epsilon * (1.0 - c.alpha)
    mixed_T2 = (1.0 - w) * mom2.T + w * mom1.T
    mixed_P2 = p2.scaled(1.0 - w) + p1.scaled(w)
    tensor21 = mixed_P2.scaled(mu21).shifted((1.0 - mu21) * mixed_T2
                                             + drift_coefficient_21(c) * gap_u_sq)

    if not is_positive_definite(tensor21):
        raise NoAdmissibleMu21([mu21], f"T21 tensor is not positive-definite for mu21 = {mu21:.6g}")
    require_positive_definite(tensor12, "T12 tensor")
    return tensor12, tensor21


def tensor_interspecies_B(mom1: Moments, mom2: Moments,
                          config: MixtureConfig) -> Tuple[SymTensor3, SymTensor3]:
    """Interspecies tensors of the second (simpler) full extension."""
    c = config
    gap_u_sq = float(np.sum((mom1.u - mom2.u) ** 2))
    tensor12 = (mom1.pressure_per_particle().scaled(c.alpha)
                .shifted((1.0 - c.alpha) * mom2.T + c.gamma * gap_u_sq))
    w = c.epsilon * (1.0 - c.alpha)
    tensor21 = (mom2.pressure_per_particle().scaled(1.0 - w)
                .shifted(w * mom1.T + drift_coefficient_21(c) * gap_u_sq))
    return tensor12, tensor21


@dataclass(frozen=True, eq=False)
class InterspeciesParameters:
    u12: np.ndarray
    u21: np.ndarray
    T12: float
    T21: float
    gap_u_sq: float
    tensor12: SymTensor3
    tensor21: SymTensor3
    mu12: Optional[float] = None
    mu21: Optional[float] = None


def interspecies_parameters(mom1: Moments, mom2: Moments,
                            config: MixtureConfig) -> InterspeciesParameters:
    """
    Every interspecies closure quantity for one state.

    |u1 - u2|^2 is computed once here and shared by all four targets.
    For BGK and ES_SINGLE the tensors are the isotropic T12 I and T21 I.
    """
    c = config
    gap_u_sq = float(np.sum((mom1.u - mom2.u) ** 2))
    u12 = interspecies_velocity_12(mom1.u, mom2.u, c.delta)
    u21 = interspecies_velocity_21(mom1.u, mom2.u, c.delta, c.epsilon, c.m1, c.m2)
    T12 = interspecies_temperature_12(mom1.T, mom2.T, c.alpha, c.gamma, gap_u_sq)
    T21 = interspecies_temperature_21(mom1.T, mom2.T, c.alpha, c.gamma, c.delta,
                                      c.epsilon, c.m1, c.m2, gap_u_sq)

    mu12 = mu21 = None
    if c.variant is ModelVariant.ES_FULL_A:
        tensor12, tensor21 = tensor_interspecies_A(mom1, mom2, c)
        mu12 = c.mu12 if c.mu12 is not None else mu12_restriction(c, mom1.n, mom2.n)
        mu21 = c.mu21 if c.mu21 is not None else solve_mu21_restriction(c, mom1.n, mom2.n)
    elif c.variant is ModelVariant.ES_FULL_B:
        tensor12, tensor21 = tensor_interspecies_B(mom1, mom2, c)
    else:
        tensor12, tensor21 = SymTensor3.identity(T12), SymTensor3.identity(T21)

    return InterspeciesParameters(u12, u21, T12, T21, gap_u_sq, tensor12, tensor21, mu12, mu21)


def self_tensor(moments: Moments, mu: float, variant: ModelVariant) -> SymTensor3:
    """Tensor of the self-relaxation target (T I for plain BGK)."""
    if variant.uses_self_tensor:
        return tensor_single(moments, mu)
    return SymTensor3.identity(moments.T)
