"""
Time integration of the mixture model.

Space-homogeneous relaxation uses classical RK4 on df/dt = rhs. The 1D
transport mode Strang-splits first-order upwind advection in x around a
per-cell collision step on a periodic slab.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from .closures import MixtureConfig
from .collision import MixtureState, rhs, total_collision_rate
from .diagnostics import DiagnosticsRecord, make_record, make_transport_record
from .vgrid import VelocityGrid

logger = logging.getLogger(__name__)

DEFAULT_STABILITY_FACTOR = 0.9
NEGATIVITY_TOLERANCE = 1e-13
_TIME_SLACK = 1e-12

RecordCallback = Callable[[DiagnosticsRecord, int], None]


class StepRejected(Exception):
    """Raised when a step would break positivity or a stability bound."""

    def __init__(self, message: str, time: Optional[float] = None):
        self.time = time
        if time is not None:
            message = f"t = {time:.6g}: {message}"
        super().__init__(message)


@dataclass
class HomogeneousRun:
    """
    A space-homogeneous relaxation run.

    dt of None picks stability_factor / (max total collision rate) at every
    step. cadence counts steps between records. run_homogeneous advances
    `state` and `time` in place.
    """

    state: MixtureState
    config: MixtureConfig
    t_end: float
    dt: Optional[float] = None
    cadence: int = 1
    stability_factor: float = DEFAULT_STABILITY_FACTOR
    time: float = 0.0


def stable_dt(state: MixtureState, config: MixtureConfig,
              stability_factor: float = DEFAULT_STABILITY_FACTOR) -> float:
    """Largest step allowed by the stability bound (inf without collisions)."""
    rate = total_collision_rate(state, config)
    if rate <= 0:
        return math.inf
    return stability_factor / rate


def _check_positivity(fields: Sequence[np.ndarray], time: float):
    for k, f in enumerate(fields, start=1):
        peak = float(np.max(f))
        lowest = float(np.min(f))
        if lowest < -NEGATIVITY_TOLERANCE * peak:
            raise StepRejected(f"f{k} reaches {lowest:.3e} (peak {peak:.3e})", time)


def step_homogeneous(state: MixtureState, config: MixtureConfig, dt: float,
                     time: float = 0.0,
                     stability_factor: float = DEFAULT_STABILITY_FACTOR) -> MixtureState:
    """
    One RK4 step of the homogeneous model.

    Args:
        state: current state (left untouched)
        config: model parameters
        dt: step size
        time: simulated time of `state`, used in error reports
        stability_factor: bound on dt times the max total collision rate

    Returns:
        New MixtureState at time + dt

    Raises:
        StepRejected: if dt breaks the stability bound or a node goes negative
    """
    rate = total_collision_rate(state, config)
    if dt * rate > stability_factor * (1.0 + _TIME_SLACK):
        raise StepRejected(f"dt = {dt:.6g} exceeds the stability bound "
                           f"{stability_factor:g} / {rate:.6g}", time)

    f1, f2 = state.fields
    k1 = rhs(state, config)
    s2 = state.with_fields(f1 + 0.5 * dt * k1[0], f2 + 0.5 * dt * k1[1])
    k2 = rhs(s2, config)
    s3 = state.with_fields(f1 + 0.5 * dt * k2[0], f2 + 0.5 * dt * k2[1])
    k3 = rhs(s3, config)
    s4 = state.with_fields(f1 + dt * k3[0], f2 + dt * k3[1])
    k4 = rhs(s4, config)

    new1 = f1 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    new2 = f2 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    _check_positivity((new1, new2), time + dt)
    return state.with_fields(new1, new2)


def run_homogeneous(run: HomogeneousRun,
                    on_record: Optional[RecordCallback] = None) -> List[DiagnosticsRecord]:
    """
    Integrate a homogeneous run to t_end.

    A record is taken at the start, every `cadence` steps and at t_end.
    on_record(record, step) is called for each one.
    """
    config = run.config
    step = 0
    records = [make_record(run.time, run.state, config)]
    if on_record:
        on_record(records[-1], step)
    logger.info(f"Homogeneous run: variant={config.variant.value} t_end={run.t_end:g} "
                f"dt={'auto' if run.dt is None else run.dt}")

    while run.t_end - run.time > _TIME_SLACK * max(1.0, abs(run.t_end)):
        dt = run.dt if run.dt is not None else stable_dt(run.state, config, run.stability_factor)
        dt = min(dt, run.t_end - run.time)
        run.state = step_homogeneous(run.state, config, dt, run.time, run.stability_factor)
        run.time += dt
        step += 1
        logger.debug(f"step {step}: t={run.time:.6g} dt={dt:.3e}")

        done = run.t_end - run.time <= _TIME_SLACK * max(1.0, abs(run.t_end))
        if step % run.cadence == 0 or done:
            if done:
                run.time = run.t_end
            record = make_record(run.time, run.state, config)
            records.append(record)
            logger.info(f"t={record.time:.6g} H={record.H:.12g} "
                        f"gapU={record.gap_u:.3e} gapT={record.gap_T:.3e}")
            if on_record:
                on_record(record, step)

    logger.info(f"Homogeneous run finished after {step} steps, {len(records)} records")
    return records


@dataclass
class Transport1DRun:
    """
    Periodic 1D slab of Nx cells, each carrying a homogeneous MixtureState.

    cfl bounds dt * V / dx for automatic steps; workers > 1 runs the
    per-cell collision steps on a thread pool.
    """

    cells: List[MixtureState]
    config: MixtureConfig
    length: float
    time: float = 0.0
    cfl: float = 0.9
    stability_factor: float = DEFAULT_STABILITY_FACTOR
    workers: int = 1

    @property
    def nx(self) -> int:
        return len(self.cells)

    @property
    def dx(self) -> float:
        return self.length / self.nx

    @property
    def grid(self) -> VelocityGrid:
        return self.cells[0].grid

    def species_fields(self, species: int) -> np.ndarray:
        """(Nx, N^3) array of one species' fields, species in {1, 2}."""
        return np.stack([c.f1 if species == 1 else c.f2 for c in self.cells])


def build_transport_run(grid: VelocityGrid, f1: np.ndarray, f2: np.ndarray,
                        m1: float, m2: float, config: MixtureConfig, length: float,
                        **options) -> Transport1DRun:
    """Build a run from (Nx, N^3) field arrays."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if f1.shape != f2.shape or f1.ndim != 2:
        raise ValueError(f"Field arrays must share an (Nx, N^3) shape, got {f1.shape} and {f2.shape}")
    cells = [MixtureState(grid, a, b, m1, m2) for a, b in zip(f1, f2)]
    return Transport1DRun(cells=cells, config=config, length=float(length), **options)


def transport_dt(run: Transport1DRun) -> float:
    """Automatic step: the smaller of the CFL and collision stability limits."""
    dt = run.cfl * run.dx / run.grid.extent
    if not run.config.is_collisionless:
        for cell in run.cells:
            dt = min(dt, stable_dt(cell, run.config, run.stability_factor))
    return dt


def _advect(fields: np.ndarray, courant: np.ndarray) -> np.ndarray:
    """First-order upwind update along axis 0 with periodic wrap."""
    upstream_left = np.roll(fields, 1, axis=0)
    upstream_right = np.roll(fields, -1, axis=0)
    positive = np.maximum(courant, 0.0)
    negative = np.minimum(courant, 0.0)
    return fields - positive * (fields - upstream_left) - negative * (upstream_right - fields)


def step_transport_1d(run: Transport1DRun, dt: float) -> Transport1DRun:
    """
    Advance the slab by dt: half advection, collisions, half advection.

    Raises:
        StepRejected: on a CFL violation or a negative node
    """
    grid = run.grid
    cfl = dt * grid.extent / run.dx
    if cfl > 1.0 + _TIME_SLACK:
        raise StepRejected(f"CFL number {cfl:.6g} exceeds 1", run.time)

    half_courant = 0.5 * dt * grid.velocities[:, 0] / run.dx
    f1 = _advect(run.species_fields(1), half_courant)
    f2 = _advect(run.species_fields(2), half_courant)

    cells = [c.with_fields(a, b) for c, a, b in zip(run.cells, f1, f2)]
    if not run.config.is_collisionless:
        def collide(cell: MixtureState) -> MixtureState:
            return step_homogeneous(cell, run.config, dt, run.time, run.stability_factor)

        if run.workers > 1:
            with ThreadPoolExecutor(max_workers=run.workers) as executor:
                cells = list(executor.map(collide, cells))
        else:
            cells = [collide(c) for c in cells]

    f1 = _advect(np.stack([c.f1 for c in cells]), half_courant)
    f2 = _advect(np.stack([c.f2 for c in cells]), half_courant)
    _check_positivity((f1, f2), run.time + dt)

    run.cells = [c.with_fields(a, b) for c, a, b in zip(cells, f1, f2)]
    run.time += dt
    return run


def run_transport_1d(run: Transport1DRun, t_end: float, cadence: int = 1,
                     dt: Optional[float] = None,
                     on_record: Optional[RecordCallback] = None) -> List[DiagnosticsRecord]:
    """
    Integrate a transport run to t_end, recording domain totals.

    dt of None re-evaluates transport_dt before every step.
    """
    config = run.config
    step = 0
    records = [make_transport_record(run.time, run.cells, config, run.dx)]
    if on_record:
        on_record(records[-1], step)
    logger.info(f"Transport run: Nx={run.nx} L={run.length:g} t_end={t_end:g} workers={run.workers}")

    while t_end - run.time > _TIME_SLACK * max(1.0, abs(t_end)):
        step_dt = dt if dt is not None else transport_dt(run)
        step_dt = min(step_dt, t_end - run.time)
        step_transport_1d(run, step_dt)
        step += 1

        done = t_end - run.time <= _TIME_SLACK * max(1.0, abs(t_end))
        if step % cadence == 0 or done:
            if done:
                run.time = t_end
            record = make_transport_record(run.time, run.cells, config, run.dx)
            records.append(record)
            logger.info(f"t={record.time:.6g} H={record.H:.12g} mass={record.mass1 + record.mass2:.12g}")
            if on_record:
                on_record(record, step)

    logger.info(f"Transport run finished after {step} steps")
    return records
