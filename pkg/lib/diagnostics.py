"""
Quantities constrained by the model's structural properties: entropy,
entropy production, conservation drifts, distance to equilibrium and the
determinant inequality used by the mixture H-theorem.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .closures import (MixtureConfig, build_maxwellian, entropy_of_gaussian,
                       tensor_single)
from .collision import MixtureState, rhs
from .moments import Moments, mixture_invariants
from .sym3 import SymTensor3, det, eigenvalues
from .vgrid import VelocityGrid

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-300

CSV_COLUMNS = (
    't',
    'n1', 'u1x', 'u1y', 'u1z', 'T1', 'lam1a', 'lam1b', 'lam1c',
    'n2', 'u2x', 'u2y', 'u2z', 'T2', 'lam2a', 'lam2b', 'lam2c',
    'mass1', 'mass2', 'momX', 'momY', 'momZ', 'energy',
    'H', 'S', 'gapU', 'gapT', 'aniso1', 'aniso2', 'lemma2_slack',
)


@dataclass(frozen=True, eq=False)
class DiagnosticsRecord:
    """One output row; per-species tuples are ordered (species 1, species 2)."""

    time: float
    densities: Tuple[float, float]
    velocities: Tuple[np.ndarray, np.ndarray]
    temperatures: Tuple[float, float]
    eigenvalues: Tuple[Tuple[float, float, float], Tuple[float, float, float]]
    mass1: float
    mass2: float
    momentum: np.ndarray
    energy: float
    H: float
    S: float
    gap_u: float
    gap_T: float
    aniso1: float
    aniso2: float
    lemma2_slack: float

    def to_row(self) -> List[float]:
        row = [self.time]
        for k in range(2):
            row.append(self.densities[k])
            row.extend(float(c) for c in self.velocities[k])
            row.append(self.temperatures[k])
            row.extend(self.eigenvalues[k])
        row.extend([self.mass1, self.mass2])
        row.extend(float(c) for c in self.momentum)
        row.extend([self.energy, self.H, self.S, self.gap_u, self.gap_T,
                    self.aniso1, self.aniso2, self.lemma2_slack])
        return row


@dataclass(frozen=True)
class EquilibriumDistance:
    gap_u: float
    gap_T: float
    aniso1: float
    aniso2: float
    maxwellian_residuals: Tuple[float, float]

    def max_value(self) -> float:
        return max(self.gap_u, self.gap_T, self.aniso1, self.aniso2, *self.maxwellian_residuals)


def _f_log_f(f: np.ndarray) -> np.ndarray:
    # 0 ln 0 = 0 falls out of the floor
    return f * np.log(np.maximum(f, LOG_FLOOR))


def species_entropy(f: np.ndarray, grid: VelocityGrid) -> float:
    return float(grid.reduce(_f_log_f(f)))


def entropy(f1: np.ndarray, f2: np.ndarray, grid: VelocityGrid) -> float:
    """Total entropy H = integral of f1 ln f1 + f2 ln f2."""
    return species_entropy(f1, grid) + species_entropy(f2, grid)


def entropy_production(state: MixtureState, config: MixtureConfig) -> float:
    """
    S = sum over species of the integral of ln f_k times its collision term.

    This is the four-term sum (two self terms, two interspecies terms);
    the H-theorem makes it <= 0.
    """
    r1, r2 = rhs(state, config)
    f1, f2 = state.fields
    grid = state.grid
    return float(grid.reduce(np.log(np.maximum(f1, LOG_FLOOR)) * r1)
                 + grid.reduce(np.log(np.maximum(f2, LOG_FLOOR)) * r2))


def lemma2_slack(tensor12: SymTensor3, tensor21: SymTensor3,
                 p1_per_n: SymTensor3, p2_per_n: SymTensor3, epsilon: float) -> float:
    """
    ln[det(T12)^eps det(T21)] - ln[det(P1/n1)^eps det(P2/n2)].

    Returns -inf when any determinant is not positive.
    """
    dets = [det(t) for t in (tensor12, tensor21, p1_per_n, p2_per_n)]
    if min(dets) <= 0:
        return float('-inf')
    d12, d21, d1, d2 = (math.log(d) for d in dets)
    return epsilon * d12 + d21 - epsilon * d1 - d2


def anisotropy(moments: Moments) -> float:
    """Max-norm deviation of P / (n T) from the identity."""
    scaled = moments.P.scaled(1.0 / (moments.n * moments.T)).shifted(-1.0)
    return scaled.max_abs()


def equilibrium_distance(state: MixtureState) -> EquilibriumDistance:
    """Velocity and temperature gaps, anisotropies and Maxwellian residuals."""
    mom1, mom2 = state.moments()
    residuals = []
    for f, mom, mass in ((state.f1, mom1, state.m1), (state.f2, mom2, state.m2)):
        maxwellian = build_maxwellian(mom.n, mom.u, mom.T, mass, state.grid)
        residuals.append(float(np.max(np.abs(f - maxwellian)) / np.max(maxwellian)))
    return EquilibriumDistance(
        gap_u=float(np.linalg.norm(mom1.u - mom2.u)),
        gap_T=abs(mom1.T - mom2.T),
        aniso1=anisotropy(mom1),
        aniso2=anisotropy(mom2),
        maxwellian_residuals=(residuals[0], residuals[1]),
    )


def state_lemma2_slack(state: MixtureState, config: MixtureConfig) -> float:
    """lemma2_slack with the interspecies tensors of the active variant."""
    mom1, mom2 = state.moments()
    params = state.targets(config).params
    return lemma2_slack(params.tensor12, params.tensor21,
                        mom1.pressure_per_particle(), mom2.pressure_per_particle(),
                        config.epsilon)


def gaussian_entropy_chain(state: MixtureState, config: MixtureConfig) -> List[Tuple[float, float, float]]:
    """
    Per species: (entropy of G_k, entropy of G_k with mu_k = 1, entropy of f_k).

    Single-species ES theory orders these ascending.
    """
    chain = []
    mus = (config.mu1, config.mu2)
    for k, (f, mom, mass) in enumerate(((state.f1, state.moments()[0], state.m1),
                                        (state.f2, state.moments()[1], state.m2))):
        g = entropy_of_gaussian(mom.n, tensor_single(mom, mus[k]), mass)
        g_full = entropy_of_gaussian(mom.n, mom.pressure_per_particle(), mass)
        chain.append((g, g_full, species_entropy(f, state.grid)))
    return chain


def make_record(time: float, state: MixtureState, config: MixtureConfig) -> DiagnosticsRecord:
    """Diagnostics of one homogeneous state."""
    mom1, mom2 = state.moments()
    momentum, energy = mixture_invariants(mom1, mom2, state.m1, state.m2)
    distance = equilibrium_distance(state)
    if config.is_collisionless:
        production, slack = 0.0, 0.0
    else:
        production, slack = entropy_production(state, config), state_lemma2_slack(state, config)
    return DiagnosticsRecord(
        time=time,
        densities=(mom1.n, mom2.n),
        velocities=(mom1.u.copy(), mom2.u.copy()),
        temperatures=(mom1.T, mom2.T),
        eigenvalues=(eigenvalues(mom1.pressure_per_particle()),
                     eigenvalues(mom2.pressure_per_particle())),
        mass1=mom1.n,
        mass2=mom2.n,
        momentum=momentum,
        energy=energy,
        H=entropy(state.f1, state.f2, state.grid),
        S=production,
        gap_u=distance.gap_u,
        gap_T=distance.gap_T,
        aniso1=distance.aniso1,
        aniso2=distance.aniso2,
        lemma2_slack=slack,
    )


def make_transport_record(time: float, cells: Sequence[MixtureState],
                          config: MixtureConfig, dx: float) -> DiagnosticsRecord:
    """
    Diagnostics of a 1D run.

    Moments, gaps and anisotropies describe the domain-averaged
    distributions; masses, momentum, energy, H and S are integrals over x.
    lemma2_slack is the minimum over cells.
    """
    first = cells[0]
    mean1 = np.mean([c.f1 for c in cells], axis=0)
    mean2 = np.mean([c.f2 for c in cells], axis=0)
    mean_state = first.with_fields(mean1, mean2)
    mom1, mom2 = mean_state.moments()
    distance = equilibrium_distance(mean_state)

    mass1 = mass2 = energy = H = S = 0.0
    momentum = np.zeros(3)
    slack = float('inf')
    for cell in cells:
        c1, c2 = cell.moments()
        cell_momentum, cell_energy = mixture_invariants(c1, c2, cell.m1, cell.m2)
        mass1 += dx * c1.n
        mass2 += dx * c2.n
        momentum += dx * cell_momentum
        energy += dx * cell_energy
        H += dx * entropy(cell.f1, cell.f2, cell.grid)
        if not config.is_collisionless:
            S += dx * entropy_production(cell, config)
            slack = min(slack, state_lemma2_slack(cell, config))
    if config.is_collisionless:
        slack = 0.0

    return DiagnosticsRecord(
        time=time,
        densities=(mom1.n, mom2.n),
        velocities=(mom1.u.copy(), mom2.u.copy()),
        temperatures=(mom1.T, mom2.T),
        eigenvalues=(eigenvalues(mom1.pressure_per_particle()),
                     eigenvalues(mom2.pressure_per_particle())),
        mass1=mass1,
        mass2=mass2,
        momentum=momentum,
        energy=energy,
        H=H,
        S=S,
        gap_u=distance.gap_u,
        gap_T=distance.gap_T,
        aniso1=distance.aniso1,
        aniso2=distance.aniso2,
        lemma2_slack=slack,
    )


def entropy_rate_from_records(records: Sequence[DiagnosticsRecord]) -> List[Tuple[float, float]]:
    """Centered finite differences (t_i, dH/dt at t_i) for interior records."""
    rates = []
    for prev, here, nxt in zip(records, records[1:], records[2:]):
        rates.append((here.time, (nxt.H - prev.H) / (nxt.time - prev.time)))
    return rates


def conservation_drifts(records: Sequence[DiagnosticsRecord], m1: float, m2: float) -> Dict[str, float]:
    """
    Largest relative drift of each conserved total over a run.

    Momentum is measured against max(|p0|, thermal momentum n1 sqrt(m1 T1) + n2 sqrt(m2 T2)).
    """
    first = records[0]
    momentum_scale = max(float(np.linalg.norm(first.momentum)),
                         first.mass1 * math.sqrt(m1 * first.temperatures[0])
                         + first.mass2 * math.sqrt(m2 * first.temperatures[1]))
    drifts = {'mass1': 0.0, 'mass2': 0.0, 'momentum': 0.0, 'energy': 0.0}
    for rec in records[1:]:
        drifts['mass1'] = max(drifts['mass1'], abs(rec.mass1 - first.mass1) / abs(first.mass1))
        drifts['mass2'] = max(drifts['mass2'], abs(rec.mass2 - first.mass2) / abs(first.mass2))
        drifts['momentum'] = max(drifts['momentum'],
                                 float(np.linalg.norm(rec.momentum - first.momentum)) / momentum_scale)
        drifts['energy'] = max(drifts['energy'], abs(rec.energy - first.energy) / abs(first.energy))
    return drifts


def summarize_run(records: Sequence[DiagnosticsRecord], m1: float, m2: float) -> Dict[str, object]:
    """Numbers reported in summary.txt."""
    final = records[-1]
    steps = [later.H - earlier.H for earlier, later in zip(records, records[1:])]
    slopes = [rate for _, rate in entropy_rate_from_records(records)]
    return {
        'final_time': final.time,
        'records': len(records),
        'gap_u': final.gap_u,
        'gap_T': final.gap_T,
        'aniso1': final.aniso1,
        'aniso2': final.aniso2,
        'drifts': conservation_drifts(records, m1, m2),
        'max_entropy_increase': max(steps) if steps else 0.0,
        'max_entropy_slope': max(slopes) if slopes else 0.0,
        'min_entropy_slope': min(slopes) if slopes else 0.0,
        'max_entropy_production': max(rec.S for rec in records),
        'min_lemma2_slack': min(rec.lemma2_slack for rec in records),
        'initial_H': records[0].H,
        'final_H': final.H,
    }
