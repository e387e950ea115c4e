"""
Tests for the velocity grid and its quadrature.
"""
import numpy as np
import pytest

from lib.closures import build_maxwellian
from lib.moments import Moments
from lib.vgrid import BadResolution, LengthMismatch, auto_extent, build_grid, integrate


class TestBuildGrid:
    """Grid construction and weights"""

    def test_too_few_points(self):
        with pytest.raises(BadResolution):
            build_grid(1.0, 3)

    def test_even_points(self):
        with pytest.raises(BadResolution):
            build_grid(1.0, 10)

    def test_nonpositive_extent(self):
        with pytest.raises(BadResolution):
            build_grid(0.0, 9)

    def test_unit_spacing(self):
        grid = build_grid(6.0, 13)
        assert grid.spacing == 1.0
        assert list(grid.nodes) == list(range(-6, 7))

    def test_center_node_is_zero(self):
        grid = build_grid(8.0, 33)
        assert grid.spacing == 0.5
        assert grid.nodes[16] == 0.0
        assert grid.size == 33 ** 3
        assert grid.weights.shape == (grid.size,)

    def test_node_ordering_x_fastest(self):
        grid = build_grid(4.0, 9)
        for ix, iy, iz in [(0, 0, 0), (3, 1, 7), (8, 8, 8), (2, 5, 0)]:
            v = grid.velocities[grid.node_index(ix, iy, iz)]
            assert tuple(v) == (grid.nodes[ix], grid.nodes[iy], grid.nodes[iz])
        assert grid.velocities[1][0] - grid.velocities[0][0] == grid.spacing

    def test_grid_arrays_are_read_only(self):
        grid = build_grid(4.0, 9)
        with pytest.raises(ValueError):
            grid.weights[0] = 1.0


class TestAutoExtent:
    """Test suite for the automatic extent"""

    def test_unit_maxwellian(self):
        assert auto_extent([Moments.from_values(1, (0, 0, 0), 1)], [1.0]) == pytest.approx(7.0)

    def test_drift_and_temperature(self):
        assert auto_extent([Moments.from_values(1, (2, 0, 0), 4)], [1.0]) == pytest.approx(16.0)

    def test_lighter_species_sets_extent(self):
        moments = [Moments.from_values(1, (0, 0, 0), 1), Moments.from_values(1, (0, 0, 0), 1)]
        assert auto_extent(moments, [1.0, 4.0]) == pytest.approx(7.0)

    def test_custom_safety(self):
        assert auto_extent([Moments.from_values(1, (0, -1, 0), 1)], [1.0], safety=5) == pytest.approx(6.0)


class TestIntegrate:
    """Quadrature of grid fields"""

    def test_constant_gives_volume(self):
        grid = build_grid(1.0, 9)
        assert integrate(np.ones(grid.size), grid) == pytest.approx(8.0, abs=1e-12)

    def test_unit_maxwellian(self, fine_grid):
        f = build_maxwellian(1.0, (0, 0, 0), 1.0, 1.0, fine_grid)
        assert integrate(f, fine_grid) == pytest.approx(1.0, abs=1e-8)

    def test_zero_field(self, fine_grid):
        assert integrate(np.zeros(fine_grid.size), fine_grid) == 0.0

    def test_length_mismatch(self, fine_grid):
        with pytest.raises(LengthMismatch):
            integrate(np.ones(10), fine_grid)

    @pytest.mark.parametrize('deterministic', [False, True])
    def test_odd_monomials_vanish(self, deterministic):
        grid = build_grid(8.0, 33, deterministic)
        vx, vy = grid.velocities[:, 0], grid.velocities[:, 1]
        assert integrate(vx, grid) == 0.0
        assert integrate(vx ** 3, grid) == 0.0
        assert integrate(vx * vy, grid) == 0.0

    def test_deterministic_matches_default(self, fine_grid):
        f = build_maxwellian(1.3, (0.4, -0.2, 0.1), 0.9, 1.0, fine_grid)
        exact = fine_grid.with_deterministic(True)
        assert integrate(f, exact) == pytest.approx(integrate(f, fine_grid), rel=1e-14)
