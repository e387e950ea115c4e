"""
Mixture Kinetics - scenario runner for the two-species BGK / ES-BGK models
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv
from jinja2 import TemplateError

from lib.builtin_scenarios import get_builtin_scenario, get_builtin_scenarios, load_builtin_scenario
from lib.closures import ModelVariant, NoAdmissibleMu21, NonpositiveTemperature, mu21_roots
from lib.diagnostics import summarize_run
from lib.moments import VacuumState
from lib.output import DiagnosticsWriter, dump_filename, ensure_output_dir, write_dump
from lib.scenario_config import (ConfigParseError, ScenarioConfig, describe_schema, load_scenario,
                                 prepare_run, scenario_extent, validate_scenario)
from lib.solver import HomogeneousRun, StepRejected, run_homogeneous, run_transport_1d
from lib.summary import get_sandbox, render_summary
from lib.sym3 import SingularTensor
from lib.vgrid import BadResolution, LengthMismatch

# Application version
VERSION = "1.0.0"

EXIT_OK = 0
EXIT_PARSE_ERROR = 2
EXIT_INVALID_CONFIG = 3
EXIT_RUNTIME_ERROR = 4

# Errors raised while integrating; all map to EXIT_RUNTIME_ERROR
RUNTIME_ERRORS = (StepRejected, NonpositiveTemperature, NoAdmissibleMu21, SingularTensor,
                  VacuumState, BadResolution, LengthMismatch)

# Load environment variables
load_dotenv()

# Configure logging
logging.basicConfig(
    level=getattr(logging, os.environ.get('MIXKIN_LOG_LEVEL', 'INFO').upper(), logging.INFO),
    format='%(asctime)s %(levelname)s %(name)s: %(message)s',
)
logger = logging.getLogger(__name__)


def env_flag(name: str, default: bool = False) -> bool:
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


def resolve_scenario(target: str) -> ScenarioConfig:
    """
    Load a scenario from a file path or a built-in name.

    Raises:
        ConfigParseError: if neither exists or the text is malformed
    """
    if os.path.isfile(target):
        return load_scenario(target)
    if get_builtin_scenario(target) is not None:
        logger.info(f"Using built-in scenario {target}")
        return load_builtin_scenario(target)
    raise ConfigParseError(f"{target!r} is neither a scenario file nor a built-in scenario")


def run_scenario(target: str, output_dir: Optional[str] = None,
                 deterministic: Optional[bool] = None,
                 dump_every: Optional[int] = None) -> int:
    """
    Parse, validate and run one scenario, writing its artifacts.

    Command-line values override scenario values, which override the environment.

    Returns:
        Process exit status (0, 2 parse error, 3 validation, 4 runtime rejection)
    """
    try:
        scenario = resolve_scenario(target)
    except ConfigParseError as e:
        logger.error(f"Config parse error: {e}")
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    violations = validate_scenario(scenario)
    if violations:
        for violation in violations:
            print(violation, file=sys.stderr)
        return EXIT_INVALID_CONFIG

    settings = scenario.output
    template_text = None
    if settings.summary_template:
        try:
            with open(settings.summary_template) as f:
                template_text = f.read()
            get_sandbox().from_string(template_text)
        except (OSError, TemplateError) as e:
            logger.error(f"Summary template error: {e}")
            print(f"config error: summary template {settings.summary_template}: {e}", file=sys.stderr)
            return EXIT_PARSE_ERROR

    directory = (output_dir or settings.directory
                 or os.environ.get('MIXKIN_OUTPUT_DIR', os.path.join('.', 'output')))
    if deterministic is None:
        deterministic = settings.deterministic
    if deterministic is None:
        deterministic = env_flag('MIXKIN_DETERMINISTIC')
    if dump_every is None and settings.dump:
        dump_every = settings.dump_every or 1
    ensure_output_dir(directory)
    logger.info(f"Running {scenario.name} into {directory} (deterministic={deterministic})")

    config = scenario.mixture
    try:
        run = prepare_run(scenario, deterministic)
    except RUNTIME_ERRORS as e:
        logger.error(f"Initialization failed: {e}")
        print(f"runtime error: {e}", file=sys.stderr)
        return EXIT_RUNTIME_ERROR

    homogeneous = isinstance(run, HomogeneousRun)
    grid = run.state.grid if homogeneous else run.grid
    records = []

    with DiagnosticsWriter(os.path.join(directory, 'diagnostics.csv')) as writer:
        def on_record(record, step):
            index = len(records)
            records.append(record)
            writer.write(record)
            if dump_every and index % dump_every == 0:
                cells = ([[run.state.f1, run.state.f2]] if homogeneous
                         else [[c.f1, c.f2] for c in run.cells])
                write_dump(os.path.join(directory, dump_filename(record.time, index)), grid.points, cells)

        try:
            if homogeneous:
                run_homogeneous(run, on_record)
            else:
                run_transport_1d(run, scenario.run.t_end, scenario.run.cadence, scenario.run.dt, on_record)
        except RUNTIME_ERRORS as e:
            when = getattr(e, 'time', None)
            stamp = f"{when:.6g}" if when is not None else f"{run.time:.6g}"
            logger.error(f"Run rejected at t = {stamp}: {e}")
            print(f"runtime error at t = {stamp}: {e}", file=sys.stderr)
            return EXIT_RUNTIME_ERROR

    context = summarize_run(records, config.m1, config.m2)
    context.update({
        'scenario': scenario.name,
        'variant': config.variant.value,
        'mode': scenario.run.mode,
        'extent': scenario_extent(scenario),
        'points': scenario.grid.points,
    })
    if config.variant is ModelVariant.ES_FULL_A:
        context['mu21_roots'] = mu21_roots(config, records[0].densities[0], records[0].densities[1])

    try:
        text = render_summary(context, template_text)
    except TemplateError as e:
        logger.error(f"Summary template error: {e}")
        print(f"config error: summary template: {e}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    with open(os.path.join(directory, 'summary.txt'), 'w') as f:
        f.write(text)

    logger.info(f"Finished {scenario.name}: final gapU={context['gap_u']:.3e} gapT={context['gap_T']:.3e}")
    return EXIT_OK


def list_scenarios():
    """Print the built-in scenario names with their descriptions."""
    for scenario in get_builtin_scenarios():
        print(f"{scenario['name']:<26} {scenario['description']}")


def print_config_schema():
    """Print every scenario key with its default, type and meaning."""
    print(describe_schema())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='mixkin',
        description='Discrete-velocity simulator for two-species BGK and ES-BGK mixtures',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {VERSION}')
    commands = parser.add_subparsers(dest='command', required=True)

    run_parser = commands.add_parser('run', help='run a scenario file or a built-in scenario')
    run_parser.add_argument('config', help='path to a scenario file, or a built-in scenario name')
    run_parser.add_argument('--output-dir', help='directory for diagnostics.csv, summary.txt and dumps')
    run_parser.add_argument('--deterministic', action='store_true', default=None,
                            help='use fixed-order reductions for bit-identical output')
    run_parser.add_argument('--dump-every', type=int, metavar='K',
                            help='write a distribution dump every K records')

    commands.add_parser('scenarios', help='list built-in scenarios')
    commands.add_parser('schema', help='print the scenario key schema')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == 'run':
        return run_scenario(args.config, args.output_dir, args.deterministic, args.dump_every)
    if args.command == 'scenarios':
        list_scenarios()
    elif args.command == 'schema':
        print_config_schema()
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
