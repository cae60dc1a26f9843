import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinnacle.harmonic.ball import discrete_ball
from pinnacle.harmonic.dirichlet import dirichlet_energy, solve_dirichlet
from pinnacle.pvar.minimizer import minimize_p_energy, p_energy, p_gradient, radius_sweep
from pinnacle.pvar.nested import NestedContourFamily, nested_energy, probe_nested_lower_bound
from pinnacle.utils.errors import DomainError, ValidityError


class TestMinimizePEnergy:
    def test_quadratic_case_is_the_harmonic_profile(self):
        m = minimize_p_energy(2.0, 20)
        expected = dirichlet_energy(solve_dirichlet(20, 1.0))
        assert m.energy == pytest.approx(expected, rel=1e-6)

    def test_pinned_and_bounded(self):
        m = minimize_p_energy(3.0, 8)
        assert m.value(0, 0) == 1.0
        assert m.value(9, 0) == 0.0
        assert m.values.min() >= -1e-9 and m.values.max() <= 1 + 1e-9

    def test_stationary_at_free_sites(self):
        m = minimize_p_energy(3.0, 8, tol=1e-9)
        grad = p_gradient(m.ball, np.asarray(m.values), 3.0)
        free = np.arange(m.ball.n_inner) != m.ball.origin
        assert np.abs(grad[:m.ball.n_inner][free]).max() <= 1e-9

    def test_energy_decreases_in_R(self):
        table = radius_sweep(1.5, [4, 8, 12], tol=1e-6)
        assert table['energy'].is_monotonic_decreasing
        assert list(table.columns) == ['p', 'R', 'energy', 'residual', 'iterations']

    def test_coordinate_agrees_with_newton(self):
        newton = minimize_p_energy(3.0, 6, tol=1e-7)
        coordinate = minimize_p_energy(3.0, 6, tol=1e-7, method='coordinate')
        assert coordinate.energy == pytest.approx(newton.energy, rel=1e-5)
        assert coordinate.method == 'coordinate'

    def test_sign_flip_keeps_energy_and_stationarity(self):
        m = minimize_p_energy(1.5, 8, tol=1e-9)
        flipped = -np.asarray(m.values)
        assert flipped[m.ball.origin] == -1.0
        assert p_energy(m.ball, flipped, 1.5) == pytest.approx(m.energy, rel=1e-12)
        grad = p_gradient(m.ball, flipped, 1.5)
        free = np.arange(m.ball.n_inner) != m.ball.origin
        assert np.abs(grad[:m.ball.n_inner][free]).max() <= 1e-9

    @given(seed=st.integers(0, 2 ** 32 - 1), p=st.sampled_from([1.2, 1.5, 2.0, 3.0]))
    @settings(max_examples=40, deadline=None)
    def test_energy_is_midpoint_convex(self, seed, p):
        ball = discrete_ball(6)
        rng = np.random.default_rng(seed)
        a, b = np.zeros(len(ball.sites)), np.zeros(len(ball.sites))
        a[:ball.n_inner] = rng.uniform(0, 1, ball.n_inner)
        b[:ball.n_inner] = rng.uniform(0, 1, ball.n_inner)
        a[ball.origin] = b[ball.origin] = 1.0
        midpoint = p_energy(ball, (a + b) / 2, p)
        assert midpoint <= (p_energy(ball, a, p) + p_energy(ball, b, p)) / 2 + 1e-9

    @pytest.mark.parametrize('p', [1.0, math.inf])
    def test_rejects_p_outside_open_interval(self, p):
        with pytest.raises(DomainError):
            minimize_p_energy(p, 8)

    def test_rejects_small_radius(self):
        with pytest.raises(DomainError):
            minimize_p_energy(2.0, 3)

    def test_rejects_unknown_method(self):
        with pytest.raises(DomainError):
            minimize_p_energy(2.0, 8, method='simplex')

    @pytest.mark.slow
    def test_quadratic_case_at_R50(self):
        m = minimize_p_energy(2.0, 50)
        assert m.energy == pytest.approx(dirichlet_energy(solve_dirichlet(50, 1.0)), rel=1e-6)


class TestNestedContourFamily:
    def test_unit_square(self):
        family = NestedContourFamily.stacked(1)
        assert list(family.lengths()) == [4]
        assert nested_energy(family, 3.0) == 4

    @pytest.mark.parametrize('h', [1, 3, 6])
    @pytest.mark.parametrize('p', [2.5, 4.0])
    def test_pyramid_uses_every_edge_once(self, h, p):
        assert nested_energy(NestedContourFamily.pyramid(h), p) == 4 * h * h

    @pytest.mark.parametrize('h', [2, 5])
    def test_stacked_squares(self, h):
        family = NestedContourFamily.stacked(h, half_width=1)
        assert nested_energy(family, 3.0) == pytest.approx(12 * h ** 3)

    def test_p1_energy_is_total_length(self):
        family = NestedContourFamily.from_rectangles([(3, 2, 1, 2), (1, 2, 1, 0), (0, 1, 0, 0)])
        assert list(family.lengths()) == [20, 12, 6]
        assert nested_energy(family, 1.0) == 38
        # the first two share part of their bottom and right sides, Delta_e = 2 there
        assert nested_energy(family, 2.0) > 38

    def test_rejects_non_nested(self):
        with pytest.raises(ValidityError):
            NestedContourFamily.from_rectangles([(0, 0, 0, 0), (1, 1, 1, 1)])

    def test_rejects_missing_origin(self):
        masks = np.zeros((1, 5, 5), dtype=bool)
        masks[0, 3, 3] = True
        with pytest.raises(ValidityError):
            NestedContourFamily(interiors=masks, offset=2)

    def test_rejects_holes(self):
        masks = np.zeros((1, 7, 7), dtype=bool)
        masks[0, 1:6, 1:6] = True
        masks[0, 2, 2] = False
        with pytest.raises(ValidityError):
            NestedContourFamily(interiors=masks, offset=3)


class TestNestedProbe:
    def test_large_p_optimum_is_the_pyramid(self):
        result = probe_nested_lower_bound(4, 10.0)
        assert result.exhaustive
        assert result.energy == 64
        assert sorted(e[0] for e in result.extents()) == [0, 1, 2, 3]

    @pytest.mark.parametrize('h', [1, 2, 3, 5])
    def test_ratio_bounded_below(self, h):
        assert probe_nested_lower_bound(h, 3.0).ratio >= 1

    def test_local_search_no_worse_than_pyramid(self):
        result = probe_nested_lower_bound(9, 3.0, search_budget=300, seed=7)
        assert not result.exhaustive
        assert result.energy <= 4 * 81

    def test_local_search_is_seeded(self):
        a = probe_nested_lower_bound(9, 3.0, search_budget=300, seed=7)
        b = probe_nested_lower_bound(9, 3.0, search_budget=300, seed=7)
        assert a.energy == b.energy and a.extents() == b.extents()

    def test_rejects_quadratic_exponent(self):
        with pytest.raises(DomainError):
            probe_nested_lower_bound(3, 2.0)

    def test_rejects_large_h(self):
        with pytest.raises(DomainError):
            probe_nested_lower_bound(13, 3.0)
