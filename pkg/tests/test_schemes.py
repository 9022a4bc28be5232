import math

import numpy as np
import pytest

from barrierfd import (BarrierContract, BarrierGeometry, DomainError, ExplicitConfig, MarketParams, SMax,
                       StabilityError, down_and_out_call, price_habis, price_mefd, price_obes)
from barrierfd.schemes import SMaxRule, closed_form, error_profile
from barrierfd.engine import ThetaPolicy
from conftest import discrete


class TestSMax:
    @pytest.mark.parametrize("text, expected", [("2S0+200", 390.0), ("2s0", 190.0), ("S0+100", 195.0),
                                                ("250", 250.0)])
    def test_parse(self, text, expected):
        assert SMax.parse(text).resolve(95.0) == expected

    def test_explicit_needs_value(self):
        with pytest.raises(ValueError):
            SMax(SMaxRule.EXPLICIT)


class TestExplicit:
    def test_obes_fine_lattice(self, down_contract, down_market):
        for L in (1000, 2000):
            assert price_obes(down_contract, down_market, ExplicitConfig(L)).value == \
                pytest.approx(5.9968, abs=1e-3)

    def test_mefd_wide_domain_converges(self, down_contract, down_market):
        v = price_mefd(down_contract, down_market, ExplicitConfig(1000)).value
        assert v == pytest.approx(5.9968, abs=1e-3)

    def test_mefd_narrow_domain_does_not(self, down_contract, down_market):
        v = price_mefd(down_contract, down_market, ExplicitConfig(1000, s_max=SMax(SMaxRule.TWO_S0))).value
        assert abs(v - 5.9968) > 0.5

    def test_obes_and_mefd_agree(self, down_contract, down_market):
        for L in (200, 1000):
            cfg = ExplicitConfig(L)
            assert price_obes(down_contract, down_market, cfg).value == pytest.approx(
                price_mefd(down_contract, down_market, cfg).value, abs=1e-3)

    def test_obes_up_and_out(self):
        c = BarrierContract(100, 0.5, 100, BarrierGeometry.up_and_out(120))
        m = MarketParams(0.1, 0.0, 0.2)
        assert price_obes(c, m, ExplicitConfig(2000)).value == pytest.approx(
            closed_form(c, m, 100.0), abs=2e-3)

    def test_negative_weights(self, down_contract, down_market):
        with pytest.raises(StabilityError):
            price_obes(down_contract, down_market, ExplicitConfig(100, lam=0.5))

    def test_unsupported(self, down_contract, down_market, double_contract):
        with pytest.raises(DomainError):
            price_obes(double_contract, down_market, ExplicitConfig(100))
        with pytest.raises(DomainError):
            price_obes(discrete(down_contract, "daily"), down_market, ExplicitConfig(100))
        with pytest.raises(DomainError):
            price_mefd(BarrierContract(100, 1, 95, BarrierGeometry.up_and_out(110)), down_market,
                       ExplicitConfig(100))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExplicitConfig(0)
        assert ExplicitConfig(100).dy(0.25, 1.0) == pytest.approx(math.sqrt(3) * 0.025)


class TestHabis:
    def test_wide_far_edge(self, down_contract, down_market):
        assert price_habis(down_contract, down_market, 400).value == pytest.approx(5.9968, abs=1e-3)
        rep = price_habis(down_contract, down_market, 100)
        assert rep.boundary_mode == "approximate"

    def test_far_edge_below_spot(self, down_contract, down_market):
        with pytest.raises(DomainError):
            price_habis(down_contract, down_market, 50, s_max=SMax.parse("90"))

    def test_up_rejected(self, down_market):
        with pytest.raises(DomainError):
            price_habis(BarrierContract(100, 1, 95, BarrierGeometry.up_and_out(110)), down_market, 50)


class TestErrorProfile:
    def test_ordering(self):
        c = BarrierContract(100, 0.5, 100, BarrierGeometry.down_and_out(90))
        m = MarketParams(0.1, 0.0, 0.2)
        from barrierfd import CutoffConfig
        cfg = CutoffConfig(4.5)
        errs = [error_profile(c, m, 40, policy=p, cfg=cfg).max_abs
                for p in (ThetaPolicy.high_order(), ThetaPolicy.crank_nicolson(), ThetaPolicy.fully_implicit())]
        assert errs[0] < errs[1] < errs[2]
        for got, ref in zip(errs, (0.00193, 0.00466, 0.02392)):
            assert ref / 2 <= got <= 2 * ref

    def test_closed_form_vectorised(self):
        c = BarrierContract(100, 1, 95, BarrierGeometry.down_and_out(90))
        m = MarketParams(0.1, 0.0, 0.25)
        S = np.array([90.0, 95.0, 120.0])
        got = closed_form(c, m, S)
        assert got[0] == 0.0
        assert got[1] == pytest.approx(down_and_out_call(95, 100, 90, 1, 0.1, 0, 0.25))

    def test_profile_double(self, double_contract):
        prof = error_profile(double_contract, MarketParams(0.1, 0, 0.2), 100)
        assert prof.S[0] == pytest.approx(95.0) and prof.S[-1] == pytest.approx(125.0)
        assert prof.error[0] == pytest.approx(0.0, abs=1e-12)
