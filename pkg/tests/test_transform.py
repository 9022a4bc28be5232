import math

import numpy as np
import pytest

from barrierfd import MarketParams, vanilla_call
from barrierfd.transform import (barrier_boundary_value, far_field_value, from_heat, heat_coefficients,
                                 heat_initial_condition, rebate_value, to_heat, to_u,
                                 vanilla_boundary_value)


@pytest.fixture
def problem(down_contract):
    return to_heat(down_contract, MarketParams(0.10, 0.03, 0.25))


class TestCoefficients:
    def test_values(self):
        nu, nu1, nu2, alpha, gamma = heat_coefficients(MarketParams(0.10, 0.03, 0.25))
        assert nu1 == pytest.approx(3.2)
        assert nu2 == pytest.approx(0.96)
        assert nu == pytest.approx(2.24)
        assert alpha == pytest.approx(-0.62)
        assert gamma == pytest.approx(-0.25 * 3.24 ** 2 - 0.96)

    def test_problem(self, problem):
        assert problem.tau_max == pytest.approx(0.5 * 0.25 ** 2)
        assert problem.x0 == pytest.approx(math.log(0.95))
        assert problem.x_b == pytest.approx(math.log(0.9))
        assert problem.remaining_time(problem.tau_max) == pytest.approx(1.0)

    def test_double_has_no_single_barrier(self, double_contract):
        p = to_heat(double_contract, MarketParams(0.1, 0, 0.2))
        with pytest.raises(AttributeError):
            p.x_b


class TestMaps:
    def test_round_trip(self, problem):
        x = np.linspace(-1, 1, 11)
        f = np.linspace(0, 30, 11)
        assert from_heat(to_u(f, x, 0.02, problem), x, 0.02, problem) == pytest.approx(f, rel=1e-14)

    def test_initial_condition_is_payoff(self, problem):
        x = np.linspace(-0.5, 0.5, 21)
        S = 100 * np.exp(x)
        assert from_heat(heat_initial_condition(x, problem), x, 0.0, problem) == \
            pytest.approx(np.maximum(S - 100, 0), abs=1e-12)

    def test_rebate_maps_back(self, problem):
        u = rebate_value(-0.2, 0.01, problem, 3.0)
        assert from_heat(u, -0.2, 0.01, problem) == pytest.approx(3.0)
        assert barrier_boundary_value(0.01, problem, 3.0) == pytest.approx(
            rebate_value(problem.x_b, 0.01, problem, 3.0))

    def test_vanilla_edge(self, problem):
        x_m, tau = 0.6, 0.02
        u = vanilla_boundary_value(tau, x_m, problem, MarketParams(0.10, 0.03, 0.25))
        expected = vanilla_call(100 * math.exp(x_m), 100, problem.remaining_time(tau), 0.10, 0.03, 0.25)
        assert from_heat(u, x_m, tau, problem) == pytest.approx(expected, rel=1e-13)

    def test_vanilla_edge_at_expiry_is_payoff(self, problem):
        u = vanilla_boundary_value(np.array([0.0]), 0.3, problem, MarketParams(0.10, 0.03, 0.25))
        assert from_heat(u, 0.3, 0.0, problem) == pytest.approx([100 * (math.exp(0.3) - 1)])

    def test_far_field_is_spot(self, problem):
        assert from_heat(far_field_value(0.01, 0.7, problem), 0.7, 0.01, problem) == \
            pytest.approx(100 * math.exp(0.7))

    def test_transformed_vanilla_solves_heat_equation(self, problem):
        """The image of the Black-Scholes call satisfies u_tau = u_xx."""
        def u(x, tau):
            f = vanilla_call(100 * math.exp(x), 100, problem.remaining_time(tau), 0.10, 0.03, 0.25)
            return to_u(f, x, tau, problem)

        x, tau, h, k = 0.1, 0.02, 1e-3, 1e-5
        u_t = (u(x, tau + k) - u(x, tau - k)) / (2 * k)
        u_xx = (u(x + h, tau) - 2 * u(x, tau) + u(x - h, tau)) / h ** 2
        assert u_t == pytest.approx(u_xx, rel=1e-4)
