import numpy as np
import pytest

from barrierfd import (BarrierContract, BarrierGeometry, MarketParams, MonitoringPolicy, down_and_out_call,
                       price_continuous, price_discrete, schedule, vanilla_call)
from barrierfd.discrete import knockout_mask, project_knockout
from barrierfd.harness import closed_form_reference
from barrierfd.transform import to_heat
from conftest import discrete

MARKET = MarketParams(0.10, 0.0, 0.20)


def down(B, text, rebate=0.0, K=100.0):
    return BarrierContract(K, 0.5, 100.0, BarrierGeometry.down_and_out(B), rebate, MonitoringPolicy.parse(text))


class TestSchedule:
    def test_levels(self):
        s = schedule(MonitoringPolicy.weekly(), 0.5, 4)
        assert s.N == 25 and s.L == 100
        assert s.projection_levels[0] == 0 and s.projection_levels[-1] == 96
        assert s.dates[-1] == pytest.approx(0.5)
        assert s.dates[0] == pytest.approx(0.02)

    def test_bad_rho(self):
        with pytest.raises(ValueError):
            schedule(MonitoringPolicy.daily(), 1.0, 0)

    def test_continuous_rejected(self):
        with pytest.raises(ValueError):
            schedule(MonitoringPolicy.continuous(), 1.0, 2)


class TestProjection:
    def test_mask(self):
        x = np.linspace(-1, 1, 5)
        assert knockout_mask(x, -0.6, None).tolist() == [True, False, False, False, False]
        assert knockout_mask(x, -0.6, 0.6).tolist() == [True, False, False, False, True]

    def test_reset_to_rebate(self):
        p = to_heat(down(90, "daily"), MARKET)
        x = np.linspace(-0.3, 0.3, 7)
        U = np.ones(7)
        project_knockout(U, x, np.log(0.9), None, 0.0, p, 0.01)
        assert U[0] == 0.0 and np.all(U[2:] == 1.0)

    def test_no_nodes_beyond(self):
        p = to_heat(down(90, "daily"), MARKET)
        U = np.ones(3)
        project_knockout(U, np.array([0.0, 0.1, 0.2]), -0.5, None, 0.0, p, 0.01)
        assert np.all(U == 1.0)


class TestDiscretePricing:
    @pytest.mark.parametrize("B, text, expected", [(95, "weekly", 6.63176), (99.9, "daily", 1.51098)])
    def test_reference_values(self, B, text, expected):
        assert price_discrete(down(B, text), MARKET, 800).value == pytest.approx(expected, abs=5e-3)

    def test_double(self, double_contract):
        c = discrete(double_contract, "weekly")
        assert price_discrete(c, MARKET, 800).value == pytest.approx(3.006, abs=5e-3)

    def test_daily_below_weekly(self):
        assert price_discrete(down(99.9, "daily"), MARKET, 400).value < \
            price_discrete(down(99.9, "weekly"), MARKET, 400).value

    def test_approaches_continuous_from_above(self):
        cont = down_and_out_call(100, 100, 99.9, 0.5, 0.1, 0.0, 0.2)
        vals = [price_discrete(down(99.9, f"count:{n}"), MARKET, 800).value for n in (25, 125, 250)]
        assert vals[0] > vals[1] > vals[2] > cont

    def test_single_date_below_strike_is_vanilla(self):
        c = down(95, "count:1")
        assert price_discrete(c, MARKET, 400).value == pytest.approx(
            vanilla_call(100, 100, 0.5, 0.1, 0, 0.2), abs=2e-3)

    def test_inequality_chain(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            K, B = rng.uniform(85, 115), rng.uniform(85, 99)
            m = MarketParams(rng.uniform(0, 0.1), rng.uniform(0, 0.05), rng.uniform(0.15, 0.4))
            c = BarrierContract(K, 0.5, 100.0, BarrierGeometry.down_and_out(B))
            d = price_discrete(discrete(c, "weekly"), m, 400).value
            van = vanilla_call(100, K, 0.5, m.r, m.q, m.sigma)
            assert closed_form_reference(c, m) <= d + 1e-6
            assert d <= van + 1e-6

    def test_spot_already_knocked_out(self):
        c = BarrierContract(100, 0.5, 60.0, BarrierGeometry.down_and_out(90), 2.0, MonitoringPolicy.parse("count:1"))
        # one date at expiry, spot far below the barrier: the rebate is paid almost surely
        assert price_discrete(c, MARKET, 400).value == pytest.approx(2.0 * np.exp(-0.1 * 0.5), abs=0.02)

    def test_worthless_barrier_short_circuit(self):
        rep = price_discrete(down(20, "daily"), MARKET, 400)
        assert rep.pde_steps == 0

    def test_explicit_rho(self):
        rep = price_discrete(down(95, "weekly"), MARKET, 200, rho=8)
        assert rep.mesh[1] == 200

    def test_needs_discrete_policy(self, down_contract, down_market):
        with pytest.raises(ValueError):
            price_discrete(down_contract, down_market, 100)

    def test_continuous_limit_consistent(self):
        cont = price_continuous(BarrierContract(100, 0.5, 100, BarrierGeometry.down_and_out(95)), MARKET, 200)
        assert price_discrete(down(95, "daily"), MARKET, 800).value > cont.value
