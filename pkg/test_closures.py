"""
Tests for relaxation targets, interspecies parameters and their admissibility windows.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_spd
from lib.closures import (MixtureConfig, ModelVariant, NoAdmissibleMu21, NonpositiveTemperature,
                          build_gaussian, build_maxwellian, delta_lower_bound, drift_coefficient_21,
                          entropy_of_gaussian, gamma_upper_bound, interspecies_parameters,
                          interspecies_temperature_12, interspecies_temperature_21,
                          interspecies_velocity_12, interspecies_velocity_21, mu12_restriction,
                          mu21_restriction_residual, mu21_roots, solve_mu21_restriction,
                          tensor_interspecies_A, tensor_interspecies_B, tensor_single,
                          validate_config)
from lib.moments import Moments, VacuumState, compute_moments
from lib.sym3 import SingularTensor, SymTensor3, det, eigenvalues
from lib.vgrid import build_grid


def random_valid_config(rng: np.random.Generator, **fixed) -> MixtureConfig:
    """A configuration drawn uniformly from inside every positivity window."""
    params = dict(
        m1=float(np.exp(rng.uniform(-2.0, 2.0))),
        m2=float(np.exp(rng.uniform(-2.0, 2.0))),
        epsilon=float(rng.uniform(0.05, 1.0)),
        alpha=float(rng.uniform(0.0, 1.0)),
    )
    params.update(fixed)
    probe = MixtureConfig(**params)
    params['delta'] = float(rng.uniform(delta_lower_bound(probe), 1.0))
    probe = MixtureConfig(**params)
    params['gamma'] = float(rng.uniform(0.0, gamma_upper_bound(probe)))
    return MixtureConfig(**params)


def moments_from(n: float, u, p_per_n: SymTensor3) -> Moments:
    return Moments(n, np.asarray(u, dtype=float), p_per_n.trace() / 3.0, p_per_n.scaled(n))


class TestValidateConfig:
    """Parameter window checks"""

    def test_default_is_valid(self):
        assert validate_config(MixtureConfig()) == []

    def test_delta_one_closes_gamma_window(self):
        found = validate_config(MixtureConfig(delta=1.0, gamma=0.1))
        assert [v.parameter for v in found] == ['gamma']
        assert '0' in found[0].bound

    def test_delta_below_window(self):
        found = validate_config(MixtureConfig(delta=-0.1))
        assert 'delta' in [v.parameter for v in found]

    def test_each_parameter_is_named(self):
        config = MixtureConfig(m1=-1.0, epsilon=1.5, alpha=2.0, beta1=0.0, nu12=0.0,
                               variant=ModelVariant.ES_SINGLE, mu1=2.0)
        names = {v.parameter for v in validate_config(config)}
        assert {'m1', 'epsilon', 'alpha', 'beta1', 'nu12', 'mu1'} <= names

    def test_collisionless_needs_explicit_self_rates(self):
        assert validate_config(MixtureConfig(nu12=0.0, nu11_override=0.0, nu22_override=0.0)) == []
        assert 'nu12' in [v.parameter for v in validate_config(MixtureConfig(nu12=0.0))]

    def test_es_full_a_restrictions(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, mu12=1.0)
        found = validate_config(config, densities=(1.0, 1.0))
        assert [v.parameter for v in found] == ['mu12']
        assert validate_config(MixtureConfig(variant=ModelVariant.ES_FULL_A), densities=(1.0, 1.0)) == []

    def test_es_full_a_without_admissible_root(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, mu2=1.0)
        found = validate_config(config, densities=(1.0, 1.0))
        assert [v.parameter for v in found] == ['mu21']

    def test_violation_message_names_bound(self):
        (violation,) = validate_config(MixtureConfig(delta=1.0, gamma=0.1))
        assert str(violation).startswith('gamma = 0.1 violates gamma in [0, 0]')


class TestInterspeciesVelocities:
    """Test suite for the mixed velocities"""

    def test_delta_one_switches_mixing_off(self):
        u1, u2 = np.array([1.0, 2.0, 0.0]), np.array([-1.0, 0.5, 3.0])
        assert np.array_equal(interspecies_velocity_12(u1, u2, 1.0), u1)
        assert np.array_equal(interspecies_velocity_21(u1, u2, 1.0, 0.7, 1.0, 3.0), u2)

    def test_equal_velocities(self):
        u = np.array([0.3, -0.1, 0.2])
        assert np.allclose(interspecies_velocity_12(u, u, 0.3), u)
        assert np.allclose(interspecies_velocity_21(u, u, 0.3, 0.5, 2.0, 1.0), u)

    def test_full_swap(self):
        u1, u2 = np.array([1.0, 0, 0]), np.array([3.0, 0, 0])
        assert np.allclose(interspecies_velocity_12(u1, u2, 0.0), (3, 0, 0))
        assert np.allclose(interspecies_velocity_21(u1, u2, 0.0, 1.0, 1.0, 1.0), (1, 0, 0))


class TestInterspeciesTemperatures:
    """Test suite for the mixed temperatures and their positivity"""

    def test_alpha_one_decouples(self):
        assert interspecies_temperature_12(1.3, 2.0, 1.0, 0.0, 0.0) == 1.3
        assert interspecies_temperature_21(1.3, 2.0, 1.0, 0.0, 0.5, 1.0, 1.0, 1.0, 0.0) == 2.0

    def test_worked_value(self):
        assert interspecies_temperature_12(1.0, 2.0, 0.5, 0.1, 4.0) == pytest.approx(1.9)

    def test_equal_states_fixed_point(self):
        assert interspecies_temperature_12(1.7, 1.7, 0.3, 0.1, 0.0) == pytest.approx(1.7)
        assert interspecies_temperature_21(1.7, 1.7, 0.3, 0.1, 0.4, 0.6, 1.0, 2.0, 0.0) == pytest.approx(1.7)

    def test_nonpositive_raises(self):
        with pytest.raises(NonpositiveTemperature):
            interspecies_temperature_12(1.0, 1.0, 0.5, -1.0, 2.0)

    def test_positivity_sweep(self, rng):
        # inside every window both temperatures stay positive; just outside a
        # violation (or a nonpositive temperature) is reported
        for _ in range(10000):
            config = random_valid_config(rng)
            T1, T2 = rng.uniform(1e-3, 5.0, size=2)
            gap = float(rng.uniform(0.0, 25.0))
            T12 = interspecies_temperature_12(T1, T2, config.alpha, config.gamma, gap)
            T21 = interspecies_temperature_21(T1, T2, config.alpha, config.gamma, config.delta,
                                              config.epsilon, config.m1, config.m2, gap)
            assert T12 > 0 and T21 > 0

            below = MixtureConfig(m1=config.m1, m2=config.m2, epsilon=config.epsilon,
                                  alpha=config.alpha, delta=delta_lower_bound(config) - 1e-3)
            assert 'delta' in [v.parameter for v in validate_config(below)]
            above = MixtureConfig(m1=config.m1, m2=config.m2, epsilon=config.epsilon,
                                  alpha=config.alpha, delta=config.delta,
                                  gamma=gamma_upper_bound(config) + 1e-3)
            assert 'gamma' in [v.parameter for v in validate_config(above)]

    def test_outside_gamma_window_goes_negative(self):
        config = MixtureConfig(delta=0.5, gamma=1.0)
        assert drift_coefficient_21(config) < 0
        with pytest.raises(NonpositiveTemperature):
            interspecies_temperature_21(0.1, 0.1, 0.5, 1.0, 0.5, 1.0, 1.0, 1.0, 10.0)

    def test_gap_coefficient_matches_drift_coefficient(self):
        config = MixtureConfig(m1=1.0, m2=3.0, epsilon=0.4, delta=0.7, alpha=0.2, gamma=0.01)
        args = (1.1, 0.9, config.alpha, config.gamma, config.delta, config.epsilon, config.m1, config.m2)
        slope = (interspecies_temperature_21(*args, 2.0) - interspecies_temperature_21(*args, 0.0)) / 2.0
        assert slope == pytest.approx(drift_coefficient_21(config), rel=1e-12)


class TestClosureIdentities:
    """Momentum and energy exchange identities of the closures"""

    def test_momentum_and_energy_closure(self, rng):
        for _ in range(1000):
            c = random_valid_config(rng, nu12=float(rng.uniform(0.1, 3.0)))
            n1, n2 = rng.uniform(0.1, 3.0, size=2)
            mom1 = Moments.from_values(n1, rng.normal(size=3), rng.uniform(0.1, 3.0))
            mom2 = Moments.from_values(n2, rng.normal(size=3), rng.uniform(0.1, 3.0))
            p = interspecies_parameters(mom1, mom2, c)

            exchange = (c.m1 * c.nu12 * n1 * n2 * (p.u12 - mom1.u)
                        + c.m2 * c.nu21 * n1 * n2 * (p.u21 - mom2.u))
            scale = c.nu12 * n1 * n2 * (c.m1 * np.linalg.norm(mom1.u) + c.m2 * np.linalg.norm(mom2.u) / c.epsilon)
            assert np.max(np.abs(exchange)) <= 1e-12 * scale + 1e-300

            heat = 1.5 * (c.nu12 * n2 * n1 * (p.T12 - mom1.T) + c.nu21 * n1 * n2 * (p.T21 - mom2.T))
            work = 0.5 * (c.m1 * c.nu12 * n2 * n1 * (p.u12 @ p.u12 - mom1.u @ mom1.u)
                          + c.m2 * c.nu21 * n1 * n2 * (p.u21 @ p.u21 - mom2.u @ mom2.u))
            energy_scale = c.nu21 * n1 * n2 * (mom1.T + mom2.T + c.m1 * mom1.u @ mom1.u
                                              + c.m2 * mom2.u @ mom2.u + c.m1 * p.gap_u_sq)
            assert abs(heat + work) <= 1e-11 * energy_scale


class TestTargets:
    """Maxwellian and Gaussian samplers"""

    def test_grid_missing_the_mean_is_a_vacuum(self):
        grid = build_grid(1.0, 9)
        assert build_maxwellian(1.0, (50.0, 0, 0), 0.01, 1.0, grid).max() == 0.0
        with pytest.raises(VacuumState):
            build_maxwellian(1.0, (50.0, 0, 0), 0.01, 1.0, grid, mass_exact=True)

    def test_maxwellian_peak_value(self, fine_grid):
        f = build_maxwellian(1.0, (0, 0, 0), 1.0, 1.0, fine_grid)
        center = fine_grid.node_index(16, 16, 16)
        assert f[center] == pytest.approx((2 * math.pi) ** -1.5, rel=1e-14)
        assert np.argmax(f) == center

    def test_maxwellian_linear_in_density(self, fine_grid):
        f1 = build_maxwellian(1.0, (0.5, 0, 0), 1.0, 1.0, fine_grid)
        f2 = build_maxwellian(2.0, (0.5, 0, 0), 1.0, 1.0, fine_grid)
        assert np.allclose(f2, 2.0 * f1, rtol=1e-14, atol=0)

    def test_maxwellian_mass_exact(self, coarse_grid):
        f = build_maxwellian(1.3, (0.2, 0, 0), 0.6, 1.0, coarse_grid, mass_exact=True)
        assert coarse_grid.reduce(f) == pytest.approx(1.3, rel=1e-14)

    def test_maxwellian_rejects_bad_input(self, fine_grid):
        with pytest.raises(NonpositiveTemperature):
            build_maxwellian(1.0, (0, 0, 0), 0.0, 1.0, fine_grid)
        with pytest.raises(ValueError):
            build_maxwellian(0.0, (0, 0, 0), 1.0, 1.0, fine_grid)

    def test_isotropic_gaussian_is_maxwellian(self, fine_grid):
        for T, m in [(1.0, 1.0), (0.7, 2.0), (2.5, 0.5)]:
            maxwellian = build_maxwellian(1.2, (0.1, -0.3, 0.2), T, m, fine_grid)
            gaussian = build_gaussian(1.2, (0.1, -0.3, 0.2), SymTensor3.identity(T), m, fine_grid)
            assert np.allclose(gaussian, maxwellian, rtol=1e-12, atol=1e-300)

    def test_gaussian_moments(self, wide_grid):
        f = build_gaussian(1.0, (0, 0, 0), SymTensor3.diag(1, 2, 3), 1.0, wide_grid)
        mom = compute_moments(f, wide_grid, 1.0)
        assert np.allclose(mom.pressure_per_particle().entries(), (1, 2, 3, 0, 0, 0), atol=1e-7)

    def test_gaussian_linear_in_density(self, fine_grid):
        tensor = SymTensor3(1.0, 0.9, 1.1, 0.2, 0.0, 0.1)
        f1 = build_gaussian(0.5, (0, 0, 0), tensor, 1.0, fine_grid)
        f2 = build_gaussian(1.5, (0, 0, 0), tensor, 1.0, fine_grid)
        assert np.allclose(f2, 3.0 * f1, rtol=1e-14, atol=0)

    def test_gaussian_requires_positive_definite(self, fine_grid):
        with pytest.raises(SingularTensor):
            build_gaussian(1.0, (0, 0, 0), SymTensor3.diag(1.0, -1.0, 1.0), 1.0, fine_grid)

    def test_entropy_of_unit_maxwellian(self):
        value = entropy_of_gaussian(1.0, SymTensor3.identity(), 1.0)
        assert value == pytest.approx(-1.5 * (math.log(2 * math.pi) + 1.0), rel=1e-14)
        assert value == pytest.approx(-4.25681, abs=1e-5)


class TestTensorSingle:
    """Single-species ES tensor"""

    def test_mu_zero_is_isotropic(self):
        mom = moments_from(1.0, (0, 0, 0), SymTensor3.diag(1, 2, 3))
        assert tensor_single(mom, 0.0) == SymTensor3.identity(2.0)

    def test_mu_one_is_pressure(self):
        mom = moments_from(2.0, (0, 0, 0), SymTensor3(1.0, 2.0, 3.0, 0.1, 0.2, 0.3))
        assert np.allclose(tensor_single(mom, 1.0).entries(), (1.0, 2.0, 3.0, 0.1, 0.2, 0.3))

    def test_mu_minus_half(self):
        mom = moments_from(1.0, (0, 0, 0), SymTensor3.diag(1, 2, 3))
        assert np.allclose(tensor_single(mom, -0.5).entries(), (2.5, 2.0, 1.5, 0, 0, 0))

    def test_spectrum_positive(self, rng):
        for _ in range(100):
            mom = moments_from(rng.uniform(0.1, 3.0), (0, 0, 0), random_spd(rng, 0.01, 5.0))
            for mu in (-0.5, 0.0, 1.0):
                assert eigenvalues(tensor_single(mom, mu))[0] > 0

    @given(mu=st.floats(min_value=-0.5, max_value=1.0),
           a=st.floats(min_value=0.01, max_value=10.0),
           b=st.floats(min_value=0.01, max_value=10.0),
           c=st.floats(min_value=0.01, max_value=10.0))
    @settings(max_examples=200, deadline=None)
    def test_spectrum_positive_for_any_weight(self, mu, a, b, c):
        mom = moments_from(1.0, (0, 0, 0), SymTensor3.diag(a, b, c))
        assert eigenvalues(tensor_single(mom, mu))[0] > 0


class TestFullExtensionA:
    """Test suite for the restricted mu12 and mu21 extension"""

    def test_mu12_restriction_with_mu1_one(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, mu1=1.0)
        assert mu12_restriction(config, 0.7, 1.9) == 1.0

    def test_default_restriction_values(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A)
        assert mu12_restriction(config, 1.0, 1.0) == 2.0
        roots = mu21_roots(config, 1.0, 1.0)
        assert roots == pytest.approx([3 - math.sqrt(5), 3 + math.sqrt(5)], rel=1e-12)
        chosen = solve_mu21_restriction(config, 1.0, 1.0)
        assert chosen == pytest.approx(3 - math.sqrt(5), rel=1e-12)
        assert abs(mu21_restriction_residual(config, 1.0, 1.0, chosen)) < 1e-10

    def test_no_admissible_root(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, mu2=1.0)
        with pytest.raises(NoAdmissibleMu21) as info:
            solve_mu21_restriction(config, 1.0, 1.0)
        assert info.value.roots == pytest.approx([1 - math.sqrt(5), 1 + math.sqrt(5)], rel=1e-12)

    def test_linear_branch(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, alpha=0.0)
        assert mu21_roots(config, 1.0, 2.0) == pytest.approx([-12.0], rel=1e-12)
        with pytest.raises(NoAdmissibleMu21):
            solve_mu21_restriction(config, 1.0, 2.0)

    def test_selected_roots_satisfy_restriction(self, rng):
        solved = 0
        for _ in range(300):
            config = random_valid_config(rng, variant=ModelVariant.ES_FULL_A,
                                         mu1=float(rng.uniform(-0.5, 1.0)), mu2=float(rng.uniform(-0.5, 1.0)))
            n1, n2 = rng.uniform(0.2, 2.0, size=2)
            try:
                mu21 = solve_mu21_restriction(config, n1, n2)
            except NoAdmissibleMu21:
                continue
            solved += 1
            assert -1e-12 <= mu21 <= 1 + 1e-12
            # values at -1, 0, 1 bound the coefficient sizes
            q_scale = max(1.0, *(abs(mu21_restriction_residual(config, n1, n2, x)) for x in (-1.0, 0.0, 1.0)))
            assert abs(mu21_restriction_residual(config, n1, n2, mu21)) < 1e-12 * q_scale
        assert solved > 0

    def test_scalar_reduction(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, mu12=0.0, mu21=0.0, gamma=0.05)
        mom1 = moments_from(1.0, (0.3, 0, 0), SymTensor3(0.8, 1.0, 1.2, 0.1, 0.0, 0.0))
        mom2 = moments_from(2.0, (-0.1, 0, 0), SymTensor3(1.4, 1.0, 0.9, 0.0, 0.0, -0.1))
        p = interspecies_parameters(mom1, mom2, MixtureConfig(gamma=0.05))
        t12, t21 = tensor_interspecies_A(mom1, mom2, config)
        assert np.allclose(t12.entries(), SymTensor3.identity(p.T12).entries(), rtol=1e-14, atol=1e-15)
        assert np.allclose(t21.entries(), SymTensor3.identity(p.T21).entries(), rtol=1e-14, atol=1e-15)

    @pytest.mark.parametrize('mu12', [0.4, 1.0, 1.7])
    def test_isotropic_inputs(self, mu12):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, mu12=mu12, mu21=0.5)
        mom1 = Moments.from_values(1.0, (0.2, 0, 0), 0.9)
        mom2 = Moments.from_values(1.5, (0, 0, 0), 1.3)
        p = interspecies_parameters(mom1, mom2, MixtureConfig())
        t12, t21 = tensor_interspecies_A(mom1, mom2, config)
        assert np.allclose(t12.entries(), SymTensor3.identity(p.T12).entries(), rtol=1e-14, atol=1e-15)
        assert np.allclose(t21.entries(), SymTensor3.identity(p.T21).entries(), rtol=1e-14, atol=1e-15)

    def test_traces_match_scalar_temperatures(self, rng):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_A, gamma=0.02)
        mom1 = moments_from(1.0, (0.3, 0, 0), SymTensor3(0.9, 1.0, 1.1, 0.05, 0, 0))
        mom2 = moments_from(1.0, (-0.2, 0, 0), SymTensor3(1.1, 1.0, 0.9, 0, 0.05, 0))
        p = interspecies_parameters(mom1, mom2, config)
        assert p.mu12 == 2.0
        assert p.tensor12.trace() / 3 == pytest.approx(p.T12, rel=1e-13)
        assert p.tensor21.trace() / 3 == pytest.approx(p.T21, rel=1e-13)


class TestFullExtensionB:
    """Test suite for the mixed-pressure-tensor extension"""

    def test_alpha_zero_has_no_tensor_part(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_B, alpha=0.0, gamma=0.1)
        mom1 = moments_from(1.0, (1, 0, 0), SymTensor3.diag(1, 2, 3))
        mom2 = Moments.from_values(1.0, (0, 0, 0), 1.5)
        t12, _ = tensor_interspecies_B(mom1, mom2, config)
        assert np.allclose(t12.entries(), SymTensor3.identity(1.5 + 0.1).entries())

    def test_equilibrium_fixed_point(self):
        config = MixtureConfig(variant=ModelVariant.ES_FULL_B, gamma=0.1, alpha=0.3)
        mom = Moments.from_values(1.0, (0.4, 0, 0), 1.2)
        t12, t21 = tensor_interspecies_B(mom, Moments.from_values(2.0, (0.4, 0, 0), 1.2), config)
        assert np.allclose(t12.entries(), SymTensor3.identity(1.2).entries())
        assert np.allclose(t21.entries(), SymTensor3.identity(1.2).entries())

    def test_traces_match_scalar_temperatures(self, rng):
        for _ in range(200):
            config = random_valid_config(rng, variant=ModelVariant.ES_FULL_B)
            mom1 = moments_from(rng.uniform(0.2, 2), rng.normal(size=3), random_spd(rng))
            mom2 = moments_from(rng.uniform(0.2, 2), rng.normal(size=3), random_spd(rng))
            p = interspecies_parameters(mom1, mom2, config)
            assert p.tensor12.trace() / 3 == pytest.approx(p.T12, rel=1e-12)
            assert p.tensor21.trace() / 3 == pytest.approx(p.T21, rel=1e-12)

    def test_determinant_inequality(self, rng):
        # det(T12)^eps det(T21) >= det(P1/n1)^eps det(P2/n2)
        worst = math.inf
        for _ in range(1000):
            config = random_valid_config(rng, variant=ModelVariant.ES_FULL_B)
            p1, p2 = random_spd(rng, 0.05, 5.0), random_spd(rng, 0.05, 5.0)
            mom1 = moments_from(rng.uniform(0.2, 2), rng.normal(size=3), p1)
            mom2 = moments_from(rng.uniform(0.2, 2), rng.normal(size=3), p2)
            t12, t21 = tensor_interspecies_B(mom1, mom2, config)
            eps = config.epsilon
            slack = (eps * math.log(det(t12)) + math.log(det(t21))
                     - eps * math.log(det(p1)) - math.log(det(p2)))
            worst = min(worst, slack)
        assert worst >= -1e-12


class TestInterspeciesParameters:
    """Bundled interspecies parameters"""

    @pytest.mark.parametrize('variant', [ModelVariant.BGK, ModelVariant.ES_SINGLE])
    def test_scalar_variants_use_isotropic_tensors(self, variant):
        config = MixtureConfig(variant=variant)
        mom1 = moments_from(1.0, (0.5, 0, 0), SymTensor3.diag(1, 2, 3))
        mom2 = Moments.from_values(1.0, (0, 0, 0), 1.0)
        p = interspecies_parameters(mom1, mom2, config)
        assert p.tensor12 == SymTensor3.identity(p.T12)
        assert p.tensor21 == SymTensor3.identity(p.T21)
        assert p.gap_u_sq == pytest.approx(0.25)
        assert p.mu12 is None and p.mu21 is None
