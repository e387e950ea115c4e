"""
Tests for the mixkin command line.
"""
import os

import pytest

from app import EXIT_INVALID_CONFIG, EXIT_OK, EXIT_PARSE_ERROR, EXIT_RUNTIME_ERROR, main
from lib.output import read_diagnostics, read_dump

SMALL_SCENARIO = """\
grid.points = 9
species1.u = 0.3, 0, 0
species2.T = 1.2
run.t_end = 1.0
run.cadence = 2
"""


@pytest.fixture
def scenario_file(tmp_path):
    def write(text=SMALL_SCENARIO, name='small.cfg'):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


class TestListings:
    """Test suite for the listing subcommands"""

    def test_scenarios(self, capsys):
        assert main(['scenarios']) == EXIT_OK
        out = capsys.readouterr().out
        for name in ('equilibrium-check', 'cross-relaxation', 'decoupled-delta1-alpha1'):
            assert name in out

    def test_schema(self, capsys):
        assert main(['schema']) == EXIT_OK
        out = capsys.readouterr().out
        assert 'mixture.gamma' in out
        assert '[output]' in out


class TestRun:
    """Test suite for the run subcommand artifacts"""

    def test_equilibrium_check(self, tmp_path):
        out = tmp_path / 'out'
        assert main(['run', 'equilibrium-check', '--output-dir', str(out)]) == EXIT_OK

        rows = read_diagnostics(str(out / 'diagnostics.csv'))
        assert rows[0]['t'] == 0.0 and rows[-1]['t'] == 2.0
        first = rows[0]
        for row in rows[1:]:
            assert abs(row['mass1'] - first['mass1']) < 1e-9 * first['mass1']
            assert abs(row['energy'] - first['energy']) < 1e-9 * first['energy']
            assert abs(row['momX'] - first['momX']) < 1e-9

        summary = (out / 'summary.txt').read_text()
        assert 'scenario: equilibrium-check' in summary
        assert 'variant: BGK' in summary
        assert not (out / 'dump_t00000.000000_00000.bin').exists()

    def test_scenario_file(self, tmp_path, scenario_file):
        out = tmp_path / 'out'
        assert main(['run', scenario_file(), '--output-dir', str(out)]) == EXIT_OK
        assert 'scenario: small' in (out / 'summary.txt').read_text()

    def test_output_dir_from_environment(self, tmp_path, scenario_file, monkeypatch):
        monkeypatch.setenv('MIXKIN_OUTPUT_DIR', str(tmp_path / 'env-out'))
        assert main(['run', scenario_file()]) == EXIT_OK
        assert (tmp_path / 'env-out' / 'diagnostics.csv').exists()

    def test_dumps(self, tmp_path, scenario_file):
        out = tmp_path / 'out'
        assert main(['run', scenario_file(), '--output-dir', str(out), '--dump-every', '1']) == EXIT_OK
        rows = read_diagnostics(str(out / 'diagnostics.csv'))
        dumps = sorted(name for name in os.listdir(out) if name.endswith('.bin'))
        assert len(dumps) == len(rows)
        contents = read_dump(str(out / dumps[0]))
        assert (contents.points, contents.nx, contents.species) == (9, 1, 2)

    def test_deterministic_runs_repeat(self, tmp_path, scenario_file):
        path = scenario_file()
        outputs = []
        for label in ('a', 'b'):
            out = tmp_path / label
            assert main(['run', path, '--output-dir', str(out), '--deterministic']) == EXIT_OK
            outputs.append((out / 'diagnostics.csv').read_bytes())
        assert outputs[0] == outputs[1]

    def test_custom_summary_template(self, tmp_path, scenario_file):
        template = tmp_path / 'summary.j2'
        template.write_text('gap {{ gap_u | sci }} after {{ records }} records\n')
        path = scenario_file(SMALL_SCENARIO + f'output.summary_template = {template}\n')
        out = tmp_path / 'out'
        assert main(['run', path, '--output-dir', str(out)]) == EXIT_OK
        assert (out / 'summary.txt').read_text().startswith('gap ')


class TestExitCodes:
    """Exit status for each failure class"""

    def test_unknown_target(self, tmp_path, capsys):
        assert main(['run', 'no-such-scenario', '--output-dir', str(tmp_path)]) == EXIT_PARSE_ERROR
        assert 'config error' in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, scenario_file, capsys):
        path = scenario_file('mixture.bogus = 1\n')
        assert main(['run', path, '--output-dir', str(tmp_path)]) == EXIT_PARSE_ERROR
        assert 'line 1' in capsys.readouterr().err

    def test_parameter_window(self, tmp_path, scenario_file, capsys):
        path = scenario_file(SMALL_SCENARIO + 'mixture.delta = 1\nmixture.gamma = 0.1\n')
        assert main(['run', path, '--output-dir', str(tmp_path)]) == EXIT_INVALID_CONFIG
        assert 'gamma' in capsys.readouterr().err
        assert not (tmp_path / 'diagnostics.csv').exists()

    def test_template_syntax_error(self, tmp_path, scenario_file):
        template = tmp_path / 'broken.j2'
        template.write_text('{% if %}')
        path = scenario_file(SMALL_SCENARIO + f'output.summary_template = {template}\n')
        assert main(['run', path, '--output-dir', str(tmp_path / 'out')]) == EXIT_PARSE_ERROR

    def test_oversized_step(self, tmp_path, scenario_file, capsys):
        path = scenario_file(SMALL_SCENARIO + 'run.dt = 5.0\n')
        out = tmp_path / 'out'
        assert main(['run', path, '--output-dir', str(out)]) == EXIT_RUNTIME_ERROR
        assert 'runtime error at t = 0' in capsys.readouterr().err
        assert len(read_diagnostics(str(out / 'diagnostics.csv'))) == 1

    def test_extent_short_of_the_mean(self, tmp_path, scenario_file, capsys):
        path = scenario_file('grid.extent = 1.0\ngrid.points = 9\nspecies1.u = 50, 0, 0\nspecies1.T = 0.01\n')
        assert main(['run', path, '--output-dir', str(tmp_path)]) == EXIT_INVALID_CONFIG
        assert 'species1.u' in capsys.readouterr().err

    def test_distribution_between_nodes(self, tmp_path, scenario_file, capsys):
        # the mean lies inside the grid but the Gaussian is far narrower than the spacing
        path = scenario_file('grid.extent = 1.0\ngrid.points = 9\nspecies1.u = 0.9, 0, 0\nspecies1.T = 1e-6\n')
        assert main(['run', path, '--output-dir', str(tmp_path)]) == EXIT_RUNTIME_ERROR
        assert 'runtime error' in capsys.readouterr().err
