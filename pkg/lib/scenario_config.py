"""
Scenario files: flat `section.key = value` text, parsed against a single
schema table that also drives `app.py schema`.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .closures import (ConfigViolation, MixtureConfig, ModelVariant,
                       build_gaussian, build_maxwellian, validate_config)
from .collision import MixtureState
from .moments import Moments
from .solver import HomogeneousRun, Transport1DRun, build_transport_run
from .sym3 import SymTensor3, eigenvalues, is_positive_definite, outer
from .vgrid import MIN_POINTS, VelocityGrid, auto_extent, build_grid

logger = logging.getLogger(__name__)


class ConfigParseError(Exception):
    """Raised for unreadable or malformed scenario text."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaEntry(NamedTuple):
    kind: str
    default: Any
    description: str
    choices: Tuple[str, ...] = ()


_INIT_KINDS = ('maxwellian', 'gaussian', 'bimaxwellian')
_MODULATIONS = ('none', 'sine', 'tophat')


def _species_schema(index: int) -> Dict[str, SchemaEntry]:
    prefix = f'species{index}'
    return {
        f'{prefix}.kind': SchemaEntry('choice', 'maxwellian', 'initial distribution shape', _INIT_KINDS),
        f'{prefix}.n': SchemaEntry('float', 1.0, 'density (first summand for bimaxwellian)'),
        f'{prefix}.u': SchemaEntry('vec3', (0.0, 0.0, 0.0), 'mean velocity "ux, uy, uz"'),
        f'{prefix}.T': SchemaEntry('float', 1.0, 'temperature (maxwellian, bimaxwellian)'),
        f'{prefix}.tensor': SchemaEntry('tensor', None,
                                        'gaussian tensor "xx, yy, zz, xy, xz, yz" in temperature units'),
        f'{prefix}.n_b': SchemaEntry('float', 0.0, 'bimaxwellian second summand density'),
        f'{prefix}.u_b': SchemaEntry('vec3', (0.0, 0.0, 0.0), 'bimaxwellian second summand velocity'),
        f'{prefix}.T_b': SchemaEntry('float', 1.0, 'bimaxwellian second summand temperature'),
        f'{prefix}.modulation': SchemaEntry('choice', 'none',
                                            'transport1d density profile in x', _MODULATIONS),
        f'{prefix}.amplitude': SchemaEntry('float', 0.0, 'profile factor is 1 + amplitude * shape(x)'),
        f'{prefix}.tophat_start': SchemaEntry('float', 0.25, 'top-hat start as a fraction of L'),
        f'{prefix}.tophat_end': SchemaEntry('float', 0.5, 'top-hat end as a fraction of L'),
    }


CONFIG_SCHEMA: Dict[str, SchemaEntry] = {
    'mixture.variant': SchemaEntry('choice', 'BGK', 'model variant',
                                   tuple(v.value for v in ModelVariant)),
    'mixture.m1': SchemaEntry('float', 1.0, 'mass of species 1'),
    'mixture.m2': SchemaEntry('float', 1.0, 'mass of species 2'),
    'mixture.epsilon': SchemaEntry('float', 1.0, 'nu12 = epsilon * nu21, in (0, 1]'),
    'mixture.beta1': SchemaEntry('float', 1.0, 'nu11 = beta1 * nu12'),
    'mixture.beta2': SchemaEntry('float', 1.0, 'nu22 = beta2 * nu21'),
    'mixture.nu12': SchemaEntry('float', 1.0, 'interspecies collision frequency'),
    'mixture.nu11': SchemaEntry('float?', None, 'explicit nu11 (auto = beta1 * nu12)'),
    'mixture.nu22': SchemaEntry('float?', None, 'explicit nu22 (auto = beta2 * nu21)'),
    'mixture.delta': SchemaEntry('float', 0.5, 'velocity mixing parameter'),
    'mixture.alpha': SchemaEntry('float', 0.5, 'temperature mixing parameter in [0, 1]'),
    'mixture.gamma': SchemaEntry('float', 0.0, 'velocity-gap heating coefficient'),
    'mixture.mu1': SchemaEntry('float', 0.0, 'species 1 tensor weight in [-1/2, 1]'),
    'mixture.mu2': SchemaEntry('float', 0.0, 'species 2 tensor weight in [-1/2, 1]'),
    'mixture.mu12': SchemaEntry('float?', None, 'ES_FULL_A weight (auto = restriction value)'),
    'mixture.mu21': SchemaEntry('float?', None, 'ES_FULL_A weight (auto = admissible restriction root)'),
    'mixture.mass_exact': SchemaEntry('bool', True, 'rescale targets so discrete densities match'),
    'grid.extent': SchemaEntry('float?', None, 'velocity half-width V (auto = thermal coverage)'),
    'grid.points': SchemaEntry('int', 33, f'odd node count per axis, >= {MIN_POINTS}'),
    'grid.safety': SchemaEntry('float', 7.0, 'thermal widths covered by an auto extent'),
    **_species_schema(1),
    **_species_schema(2),
    'run.mode': SchemaEntry('choice', 'homogeneous', 'run type', ('homogeneous', 'transport1d')),
    'run.dt': SchemaEntry('float?', None, 'time step (auto = stability / CFL limit)'),
    'run.t_end': SchemaEntry('float', 10.0, 'final time'),
    'run.cadence': SchemaEntry('int', 10, 'steps between diagnostics records'),
    'run.stability_factor': SchemaEntry('float', 0.9, 'bound on dt times the max collision rate'),
    'run.nx': SchemaEntry('int', 32, 'transport1d cell count'),
    'run.length': SchemaEntry('float', 1.0, 'transport1d domain length'),
    'run.cfl': SchemaEntry('float', 0.9, 'transport1d bound on dt V / dx for auto steps'),
    'run.workers': SchemaEntry('int', 1, 'threads for per-cell collision steps'),
    'output.directory': SchemaEntry('str?', None, 'output directory (default MIXKIN_OUTPUT_DIR)'),
    'output.dump': SchemaEntry('bool', False, 'write binary distribution dumps'),
    'output.dump_every': SchemaEntry('int', 0, 'records between dumps (0 = every record)'),
    'output.deterministic': SchemaEntry('bool?', None, 'fixed-order reductions (default MIXKIN_DETERMINISTIC)'),
    'output.summary_template': SchemaEntry('str?', None, 'Jinja2 template file for summary.txt'),
}


@dataclass(frozen=True)
class SpeciesInit:
    kind: str = 'maxwellian'
    n: float = 1.0
    u: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    T: float = 1.0
    tensor: Optional[Tuple[float, ...]] = None
    n_b: float = 0.0
    u_b: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    T_b: float = 1.0
    modulation: str = 'none'
    amplitude: float = 0.0
    tophat_start: float = 0.25
    tophat_end: float = 0.5

    def components(self) -> List[Moments]:
        """Moments of each summand, treating tensors as n * tensor pressures."""
        if self.kind == 'gaussian':
            tensor = SymTensor3.from_entries(self.tensor)
            return [Moments(self.n, np.asarray(self.u, dtype=float), tensor.trace() / 3.0,
                            tensor.scaled(self.n))]
        parts = [Moments.from_values(self.n, self.u, self.T)]
        if self.kind == 'bimaxwellian':
            parts.append(Moments.from_values(self.n_b, self.u_b, self.T_b))
        return parts

    def total_density(self) -> float:
        return self.n + (self.n_b if self.kind == 'bimaxwellian' else 0.0)

    def profile(self, x: np.ndarray, length: float) -> np.ndarray:
        """Density factor at cell centers x."""
        if self.modulation == 'sine':
            shape = np.sin(2.0 * math.pi * x / length)
        elif self.modulation == 'tophat':
            shape = ((x >= self.tophat_start * length) & (x < self.tophat_end * length)).astype(float)
        else:
            shape = np.zeros_like(x)
        return 1.0 + self.amplitude * shape


@dataclass(frozen=True)
class GridSettings:
    extent: Optional[float] = None
    points: int = 33
    safety: float = 7.0


@dataclass(frozen=True)
class RunSettings:
    mode: str = 'homogeneous'
    dt: Optional[float] = None
    t_end: float = 10.0
    cadence: int = 10
    stability_factor: float = 0.9
    nx: int = 32
    length: float = 1.0
    cfl: float = 0.9
    workers: int = 1


@dataclass(frozen=True)
class OutputSettings:
    directory: Optional[str] = None
    dump: bool = False
    dump_every: int = 0
    deterministic: Optional[bool] = None
    summary_template: Optional[str] = None


@dataclass(frozen=True)
class ScenarioConfig:
    mixture: MixtureConfig = field(default_factory=MixtureConfig)
    grid: GridSettings = field(default_factory=GridSettings)
    species: Tuple[SpeciesInit, SpeciesInit] = (SpeciesInit(), SpeciesInit())
    run: RunSettings = field(default_factory=RunSettings)
    output: OutputSettings = field(default_factory=OutputSettings)
    name: str = 'scenario'


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def _parse_floats(text: str, count: int) -> Tuple[float, ...]:
    parts = [p for p in text.replace(',', ' ').split() if p]
    if len(parts) != count:
        raise ValueError(f"expected {count} numbers, got {len(parts)}")
    return tuple(_parse_float(p) for p in parts)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ('true', 'yes', 'on', '1'):
        return True
    if lowered in ('false', 'no', 'off', '0'):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def parse_value(key: str, text: str) -> Any:
    """Convert one raw value according to the schema entry for key."""
    entry = CONFIG_SCHEMA[key]
    kind = entry.kind
    optional = kind.endswith('?')
    if optional:
        if text.lower() == 'auto' or text == '':
            return None
        kind = kind[:-1]

    if kind == 'float':
        return _parse_float(text)
    if kind == 'int':
        return int(text)
    if kind == 'bool':
        return _parse_bool(text)
    if kind == 'str':
        return text
    if kind == 'vec3':
        return _parse_floats(text, 3)
    if kind == 'tensor':
        return _parse_floats(text, 6)
    if kind == 'choice':
        for choice in entry.choices:
            if text.lower() == choice.lower():
                return choice
        raise ValueError(f"{text!r} is not one of {', '.join(entry.choices)}")
    raise ValueError(f"unknown schema type {kind}")


def parse_scenario_text(text: str, name: str = 'scenario') -> ScenarioConfig:
    """
    Parse scenario text into a ScenarioConfig.

    Raises:
        ConfigParseError: on a malformed line, an unknown or repeated key,
            or a value that does not match its schema type
    """
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigParseError(f"expected 'section.key = value', got {raw.strip()!r}", number)
        key, value = (part.strip() for part in line.split('=', 1))
        if key not in CONFIG_SCHEMA:
            raise ConfigParseError(f"unknown key {key!r}", number)
        if key in values:
            raise ConfigParseError(f"key {key!r} given twice", number)
        try:
            values[key] = parse_value(key, value)
        except ValueError as e:
            raise ConfigParseError(f"{key}: {e}", number)

    def get(key: str) -> Any:
        return values.get(key, CONFIG_SCHEMA[key].default)

    mixture = MixtureConfig(
        m1=get('mixture.m1'), m2=get('mixture.m2'), epsilon=get('mixture.epsilon'),
        beta1=get('mixture.beta1'), beta2=get('mixture.beta2'), nu12=get('mixture.nu12'),
        delta=get('mixture.delta'), alpha=get('mixture.alpha'), gamma=get('mixture.gamma'),
        mu1=get('mixture.mu1'), mu2=get('mixture.mu2'),
        mu12=get('mixture.mu12'), mu21=get('mixture.mu21'),
        variant=ModelVariant(get('mixture.variant')),
        nu11_override=get('mixture.nu11'), nu22_override=get('mixture.nu22'),
        mass_exact=get('mixture.mass_exact'),
    )
    species = tuple(
        SpeciesInit(**{key.split('.', 1)[1]: get(key) for key in _species_schema(k)})
        for k in (1, 2)
    )
    for k, init in enumerate(species, start=1):
        if init.kind == 'gaussian' and init.tensor is None:
            raise ConfigParseError(f"species{k}.kind = gaussian needs species{k}.tensor")

    return ScenarioConfig(
        mixture=mixture,
        grid=GridSettings(get('grid.extent'), get('grid.points'), get('grid.safety')),
        species=species,
        run=RunSettings(**{key.split('.', 1)[1]: get(key) for key in CONFIG_SCHEMA if key.startswith('run.')}),
        output=OutputSettings(**{key.split('.', 1)[1]: get(key) for key in CONFIG_SCHEMA
                                 if key.startswith('output.')}),
        name=name,
    )


def apply_overrides(text: str, overrides: Dict[str, Any]) -> str:
    """Replace (or append) keys of scenario text; tuple values are comma-joined."""
    kept = []
    for raw in text.splitlines():
        line = raw.split('#', 1)[0]
        if '=' in line and line.split('=', 1)[0].strip() in overrides:
            continue
        kept.append(raw)
    for key, value in overrides.items():
        if isinstance(value, (tuple, list)):
            value = ', '.join(repr(float(v)) for v in value)
        elif isinstance(value, bool):
            value = 'true' if value else 'false'
        elif value is None:
            value = 'auto'
        kept.append(f'{key} = {value}')
    return '\n'.join(kept) + '\n'


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """Read and parse a scenario file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigParseError(f"cannot read {path}: {e}")
    logger.info(f"Loaded scenario file {path}")
    return parse_scenario_text(text, name=path.stem)


def validate_scenario(scenario: ScenarioConfig) -> List[ConfigViolation]:
    """All parameter violations of a scenario (empty when it can run)."""
    found: List[ConfigViolation] = []

    def check(ok: bool, parameter: str, bound: str, value: float):
        if not ok:
            found.append(ConfigViolation(parameter, bound, value))

    grid = scenario.grid
    check(grid.points >= MIN_POINTS and grid.points % 2 == 1, 'grid.points',
          f'odd and >= {MIN_POINTS}', grid.points)
    if grid.extent is not None:
        check(grid.extent > 0, 'grid.extent', 'extent > 0', grid.extent)
    check(grid.safety > 0, 'grid.safety', 'safety > 0', grid.safety)

    run = scenario.run
    check(run.t_end > 0, 'run.t_end', 't_end > 0', run.t_end)
    if run.dt is not None:
        check(run.dt > 0, 'run.dt', 'dt > 0', run.dt)
    check(run.cadence >= 1, 'run.cadence', 'cadence >= 1', run.cadence)
    check(run.stability_factor > 0, 'run.stability_factor', 'stability_factor > 0', run.stability_factor)
    check(run.workers >= 1, 'run.workers', 'workers >= 1', run.workers)
    if run.mode == 'transport1d':
        check(run.nx >= 3, 'run.nx', 'nx >= 3', run.nx)
        check(run.length > 0, 'run.length', 'length > 0', run.length)
        check(0 < run.cfl <= 1, 'run.cfl', 'cfl in (0, 1]', run.cfl)
    check(scenario.output.dump_every >= 0, 'output.dump_every', 'dump_every >= 0',
          scenario.output.dump_every)

    for k, init in enumerate(scenario.species, start=1):
        prefix = f'species{k}'
        check(init.n > 0, f'{prefix}.n', 'n > 0', init.n)
        if init.kind == 'gaussian':
            tensor = SymTensor3.from_entries(init.tensor)
            check(is_positive_definite(tensor), f'{prefix}.tensor', 'positive-definite',
                  eigenvalues(tensor)[0])
        else:
            check(init.T > 0, f'{prefix}.T', 'T > 0', init.T)
        if init.kind == 'bimaxwellian':
            check(init.n_b > 0, f'{prefix}.n_b', 'n_b > 0', init.n_b)
            check(init.T_b > 0, f'{prefix}.T_b', 'T_b > 0', init.T_b)
        if grid.extent is not None and grid.extent > 0:
            means = [init.u, init.u_b] if init.kind == 'bimaxwellian' else [init.u]
            drift = max(abs(c) for u in means for c in u)
            check(drift < grid.extent, f'{prefix}.u', f'max |u| < grid.extent = {grid.extent:g}', drift)
        if run.mode == 'transport1d' and init.modulation != 'none':
            if init.modulation == 'sine':
                check(abs(init.amplitude) < 1, f'{prefix}.amplitude', '|amplitude| < 1 for sine',
                      init.amplitude)
            else:
                check(init.amplitude > -1, f'{prefix}.amplitude', 'amplitude > -1 for tophat',
                      init.amplitude)
                check(0 <= init.tophat_start < init.tophat_end <= 1, f'{prefix}.tophat_end',
                      '0 <= tophat_start < tophat_end <= 1', init.tophat_end)

    densities = None
    if not found:
        densities = (scenario.species[0].total_density(), scenario.species[1].total_density())
    found.extend(validate_config(scenario.mixture, densities))
    return found


def initial_moments(init: SpeciesInit, mass: float) -> Moments:
    """Exact moments of a species' initial distribution."""
    parts = init.components()
    n = sum(p.n for p in parts)
    u = sum(p.n * p.u for p in parts) / n
    P = SymTensor3(0.0, 0.0, 0.0)
    for p in parts:
        P = P + p.P + outer(p.u - u).scaled(mass * p.n)
    return Moments(n, u, P.trace() / (3.0 * n), P)


def scenario_extent(scenario: ScenarioConfig) -> float:
    """Grid extent: the configured one, or thermal coverage of every summand."""
    if scenario.grid.extent is not None:
        return scenario.grid.extent
    coverage, masses = [], []
    mixture = scenario.mixture
    for init, mass in zip(scenario.species, (mixture.m1, mixture.m2)):
        for part in init.components():
            widest = eigenvalues(part.pressure_per_particle())[2]
            coverage.append(Moments.from_values(part.n, part.u, widest))
            masses.append(mass)
    return auto_extent(coverage, masses, scenario.grid.safety)


def scenario_grid(scenario: ScenarioConfig, deterministic: bool = False) -> VelocityGrid:
    return build_grid(scenario_extent(scenario), scenario.grid.points, deterministic)


def sample_species(init: SpeciesInit, mass: float, grid: VelocityGrid,
                   mass_exact: bool = True) -> np.ndarray:
    """Sample one species' homogeneous initial distribution on the grid."""
    if init.kind == 'gaussian':
        return build_gaussian(init.n, init.u, SymTensor3.from_entries(init.tensor), mass, grid, mass_exact)
    f = build_maxwellian(init.n, init.u, init.T, mass, grid, mass_exact)
    if init.kind == 'bimaxwellian':
        f = f + build_maxwellian(init.n_b, init.u_b, init.T_b, mass, grid, mass_exact)
    return f


def prepare_run(scenario: ScenarioConfig,
                deterministic: bool = False) -> Union[HomogeneousRun, Transport1DRun]:
    """Build the grid, initial fields and run object for a validated scenario."""
    mixture = scenario.mixture
    grid = scenario_grid(scenario, deterministic)
    fields = [sample_species(init, mass, grid, mixture.mass_exact)
              for init, mass in zip(scenario.species, (mixture.m1, mixture.m2))]
    run = scenario.run
    logger.info(f"Scenario {scenario.name}: mode={run.mode} grid V={grid.extent:.6g} N={grid.points}")

    if run.mode == 'homogeneous':
        state = MixtureState(grid, fields[0], fields[1], mixture.m1, mixture.m2)
        return HomogeneousRun(state=state, config=mixture, t_end=run.t_end, dt=run.dt,
                              cadence=run.cadence, stability_factor=run.stability_factor)

    dx = run.length / run.nx
    x = (np.arange(run.nx) + 0.5) * dx
    cells = [np.outer(init.profile(x, run.length), f) for init, f in zip(scenario.species, fields)]
    return build_transport_run(grid, cells[0], cells[1], mixture.m1, mixture.m2, mixture, run.length,
                               cfl=run.cfl, stability_factor=run.stability_factor, workers=run.workers)


def describe_schema() -> str:
    """Human-readable listing of every scenario key."""
    lines = []
    section = None
    for key, entry in CONFIG_SCHEMA.items():
        current = key.split('.', 1)[0]
        if current != section:
            if section is not None:
                lines.append('')
            lines.append(f'[{current}]')
            section = current
        default = 'auto' if entry.default is None else entry.default
        if isinstance(default, tuple):
            default = ', '.join(f'{v:g}' for v in default)
        kind = entry.kind.rstrip('?')
        if entry.choices:
            kind = '|'.join(entry.choices)
        lines.append(f'{key} = {default}    ({kind}) {entry.description}')
    return '\n'.join(lines)
