"""
Built-in scenarios that ship with the simulator.
They are stored in code rather than as files so `app.py run <name>` always works.
"""
from typing import Any, Dict, List, Optional

from .scenario_config import ScenarioConfig, apply_overrides, parse_scenario_text


def get_builtin_scenarios() -> List[Dict[str, Any]]:
    """
    Get list of built-in scenario dictionaries.

    Returns:
        List of dictionaries with keys: name, description, config_text, is_builtin
    """
    return [
        {
            'name': 'equilibrium-check',
            'description': 'Both species in a common Maxwellian; every rate and drift should vanish',
            'config_text': _get_equilibrium_check_text(),
            'is_builtin': True,
        },
        {
            'name': 'cross-relaxation',
            'description': 'Counter-streaming species at different temperatures relax to a common state',
            'config_text': _get_cross_relaxation_text(),
            'is_builtin': True,
        },
        {
            'name': 'decoupled-delta1-alpha1',
            'description': 'delta = alpha = 1: the species never exchange momentum or energy, no global equilibrium',
            'config_text': _get_decoupled_text(),
            'is_builtin': True,
        },
        {
            'name': 'temperature-gap',
            'description': 'Species of unequal mass at rest with a fourfold temperature ratio',
            'config_text': _get_temperature_gap_text(),
            'is_builtin': True,
        },
        {
            'name': 'anisotropic-relaxation',
            'description': 'Anisotropic Gaussians isotropize under the second full ES extension',
            'config_text': _get_anisotropic_text(),
            'is_builtin': True,
        },
        {
            'name': 'es-full-a-relaxation',
            'description': 'First full ES extension with mu12 / mu21 taken from their restrictions',
            'config_text': _get_es_full_a_text(),
            'is_builtin': True,
        },
        {
            'name': 'transport-sine',
            'description': 'Periodic slab with a sine density perturbation and a drifting second species',
            'config_text': _get_transport_sine_text(),
            'is_builtin': True,
        },
        {
            'name': 'free-streaming',
            'description': 'Collisionless slab: a top-hat density profile advects at the node velocities',
            'config_text': _get_free_streaming_text(),
            'is_builtin': True,
        },
    ]


def get_builtin_scenario(name: str) -> Optional[Dict[str, Any]]:
    """
    Get a specific built-in scenario by name.

    Args:
        name: scenario name, e.g. 'cross-relaxation'

    Returns:
        Scenario dictionary or None if not found
    """
    for scenario in get_builtin_scenarios():
        if scenario['name'] == name:
            return scenario
    return None


def load_builtin_scenario(name: str, overrides: Optional[Dict[str, Any]] = None) -> ScenarioConfig:
    """
    Parse a built-in scenario, optionally replacing some of its keys.

    Raises:
        KeyError: if no built-in scenario has this name
    """
    scenario = get_builtin_scenario(name)
    if scenario is None:
        raise KeyError(name)
    text = scenario['config_text']
    if overrides:
        text = apply_overrides(text, overrides)
    return parse_scenario_text(text, name=name)


def _get_equilibrium_check_text() -> str:
    return """\
# common Maxwellian: the collision terms vanish up to quadrature
mixture.variant = BGK
species1.n = 1.0
species1.u = 0.2, 0, 0
species1.T = 1.0
species2.n = 1.0
species2.u = 0.2, 0, 0
species2.T = 1.0
run.t_end = 2.0
run.cadence = 1
"""


def _get_cross_relaxation_text() -> str:
    return """\
mixture.variant = BGK
species1.n = 1.0
species1.u = 0.5, 0, 0
species1.T = 1.0
species2.n = 1.0
species2.u = -0.5, 0, 0
species2.T = 1.5
# 20 / (nu12 n2)
run.t_end = 20.0
run.cadence = 4
"""


def _get_decoupled_text() -> str:
    return """\
mixture.variant = BGK
mixture.delta = 1.0
mixture.alpha = 1.0
species1.n = 1.0
species1.u = 0.5, 0, 0
species1.T = 1.0
species2.n = 1.0
species2.u = -0.5, 0, 0
species2.T = 1.5
run.t_end = 20.0
run.cadence = 4
"""


def _get_temperature_gap_text() -> str:
    return """\
mixture.variant = BGK
mixture.m1 = 1.0
mixture.m2 = 2.0
species1.n = 1.0
species1.T = 0.5
species2.n = 1.0
species2.T = 2.0
run.t_end = 20.0
run.cadence = 4
"""


def _get_anisotropic_text() -> str:
    return """\
mixture.variant = ES_FULL_B
mixture.mu1 = 0.5
mixture.mu2 = -0.5
species1.kind = gaussian
species1.n = 1.0
species1.tensor = 0.6, 1.0, 1.4, 0.2, 0, 0
species2.kind = gaussian
species2.n = 1.0
species2.u = 0.3, 0, 0
species2.tensor = 1.4, 1.0, 0.6, 0, 0.1, 0
run.t_end = 20.0
run.cadence = 4
"""


def _get_es_full_a_text() -> str:
    return """\
# with these densities the restrictions give mu12 = 2, mu21 = 3 - sqrt(5)
mixture.variant = ES_FULL_A
species1.kind = gaussian
species1.n = 1.0
species1.tensor = 0.8, 1.0, 1.2, 0, 0, 0
species2.kind = gaussian
species2.n = 1.0
species2.tensor = 1.2, 1.0, 0.8, 0, 0, 0
run.t_end = 20.0
run.cadence = 4
"""


def _get_transport_sine_text() -> str:
    return """\
mixture.variant = BGK
grid.points = 17
species1.n = 1.0
species1.T = 1.0
species1.modulation = sine
species1.amplitude = 0.2
species2.n = 1.0
species2.u = 0.3, 0, 0
species2.T = 1.2
run.mode = transport1d
run.nx = 16
run.length = 16.0
run.t_end = 2.0
run.cadence = 4
"""


def _get_free_streaming_text() -> str:
    return """\
mixture.variant = BGK
mixture.nu12 = 0
mixture.nu11 = 0
mixture.nu22 = 0
grid.points = 17
species1.n = 0.1
species1.modulation = tophat
species1.amplitude = 9.0
species2.n = 0.1
run.mode = transport1d
run.nx = 32
run.length = 32.0
run.t_end = 4.0
run.cadence = 4
"""
