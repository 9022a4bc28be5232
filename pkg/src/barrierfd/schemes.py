"""Comparison schemes: explicit lattices and the approximate-boundary implicit run.

OBES and MEFD are the same explicit scheme in y = ln S with spacing
dy = lambda * sigma * sqrt(dt); they differ only in the far edge. OBES stops at
the optimal cutoff S_m and imposes the exact vanilla value there; MEFD runs up
to a user-chosen S_max and imposes f = S_max. HABIS is the high-order implicit
solver of :mod:`barrierfd.engine` with that same approximate far edge.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import analytic
from .boundary import CutoffConfig, barrier_worthless, single_cutoff
from .contracts import BarrierContract, BarrierKind, MarketParams, require_valid
from .engine import (ContinuousPlan, PriceReport, ThetaPolicy, _vanilla_report, default_time_steps,
                     extract_price, lagrange_at, plan_continuous, solve_plan)
from .errors import DomainError, StabilityError
from .transform import far_field_value, rebate_value, to_heat


class SMaxRule(str, Enum):
    TWO_S0_PLUS_200 = "2S0+200"
    TWO_S0 = "2S0"
    S0_PLUS_100 = "S0+100"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class SMax:
    """Far-edge placement for approximate-boundary runs."""
    rule: SMaxRule = SMaxRule.TWO_S0_PLUS_200
    value: Optional[float] = None

    def __post_init__(self):
        if self.rule is SMaxRule.EXPLICIT and not (self.value and self.value > 0):
            raise ValueError("explicit S_max needs a positive value")

    @classmethod
    def parse(cls, text: str) -> "SMax":
        text = text.strip().replace(" ", "")
        for rule in SMaxRule:
            if rule is not SMaxRule.EXPLICIT and text.upper() == rule.value.upper():
                return cls(rule)
        return cls(SMaxRule.EXPLICIT, float(text))

    def resolve(self, S0: float) -> float:
        if self.rule is SMaxRule.TWO_S0_PLUS_200:
            return 2 * S0 + 200
        if self.rule is SMaxRule.TWO_S0:
            return 2 * S0
        if self.rule is SMaxRule.S0_PLUS_100:
            return S0 + 100
        return float(self.value)

    def __str__(self) -> str:
        return str(self.value) if self.rule is SMaxRule.EXPLICIT else self.rule.value


@dataclass(frozen=True)
class ExplicitConfig:
    L: int
    lam: float = math.sqrt(3.0)
    s_max: SMax = field(default_factory=SMax)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def dy(self, sigma: float, T: float) -> float:
        return self.lam * sigma * math.sqrt(T / self.L)


def _weights(market: MarketParams, dt: float, dy: float):
    a = market.sigma ** 2 * dt / dy ** 2
    b = (market.r - market.q - 0.5 * market.sigma ** 2) * dt / dy
    pu, pm, pd = 0.5 * (a + b), 1.0 - a, 0.5 * (a - b)
    if min(pu, pm, pd) < 0:
        raise StabilityError(f"negative explicit weights (pu={pu:.3g}, pm={pm:.3g}, pd={pd:.3g})")
    return pu, pm, pd


def _explicit(contract: BarrierContract, market: MarketParams, config: ExplicitConfig,
              far_edge: float, far_values, boundary_mode: str, note: str, t0: float) -> PriceReport:
    """Explicit stepping with the barrier on a node and the far edge at or beyond ``far_edge``.

    ``far_values(S_edge, t_remaining)`` gives the far edge data.
    """
    T, K, Rb = contract.T, contract.K, contract.rebate
    L = config.L
    dt = T / L
    dy = config.dy(market.sigma, T)
    pu, pm, pd = _weights(market, dt, dy)
    yb = math.log(contract.geometry.barrier)
    J = max(2, math.ceil(abs(math.log(far_edge) - yb) / dy - 1e-12))
    down = contract.kind is BarrierKind.DOWN_AND_OUT
    y = yb + dy * np.arange(J + 1) if down else yb - dy * np.arange(J, -1, -1)
    S = np.exp(y)
    rem = dt * np.arange(L + 1)
    far = np.asarray(far_values(S[-1] if down else S[0], rem), dtype=float)
    disc = math.exp(-market.r * dt)

    V = np.maximum(S - K, 0.0)
    b_idx, f_idx = (0, -1) if down else (-1, 0)
    V[b_idx] = Rb
    V[f_idx] = far[0]
    for n in range(1, L + 1):
        V[1:-1] = disc * (pu * V[2:] + pm * V[1:-1] + pd * V[:-2])
        V[b_idx] = Rb
        V[f_idx] = far[n]
    if not np.all(np.isfinite(V)):
        raise StabilityError("explicit scheme produced non-finite values")

    y0 = math.log(contract.S0)
    j = (y0 - y[0]) / dy
    if abs(j - round(j)) < 1e-9:
        value, how = float(V[int(round(j))]), "aligned"
    else:
        i0 = min(max(int(math.floor(j)) - 1, 0), len(y) - 4)
        value, how = float(lagrange_at(y[i0:i0 + 4], V[i0:i0 + 4], y0)), "interpolated"
    return PriceReport(value, (J, L), time.perf_counter() - t0, boundary_mode, how, L,
                       (float(S[0]), float(S[-1])), note)


def _explicit_pre(contract: BarrierContract, market: MarketParams):
    require_valid(contract, market)
    if contract.monitoring.is_discrete:
        raise DomainError("explicit comparison schemes support continuous monitoring only")
    if contract.kind is BarrierKind.DOUBLE_KNOCK_OUT:
        raise DomainError("explicit comparison schemes support single barriers only")


def price_obes(contract: BarrierContract, market: MarketParams, config: ExplicitConfig,
               cfg: CutoffConfig = CutoffConfig()) -> PriceReport:
    """Explicit scheme on [barrier, S_m] with the exact vanilla value on the cutoff edge."""
    _explicit_pre(contract, market)
    t0 = time.perf_counter()
    side = "down" if contract.kind is BarrierKind.DOWN_AND_OUT else "up"
    cut = single_cutoff(side, contract.geometry.barrier, contract.K, contract.T, market, cfg)
    if barrier_worthless(contract.S0, cut):
        return _vanilla_report(contract, market, t0)

    def vanilla_edge(S_edge, rem):
        return analytic.vanilla_call_curve(S_edge, contract.K, rem, market.r, market.q, market.sigma)

    return _explicit(contract, market, config, cut.S_m, vanilla_edge, "optimal", "", t0)


def price_mefd(contract: BarrierContract, market: MarketParams, config: ExplicitConfig,
               cfg: CutoffConfig = CutoffConfig()) -> PriceReport:
    """Explicit scheme on [barrier, S_max] with f = S_max on the far edge (down-and-out)."""
    _explicit_pre(contract, market)
    if contract.kind is not BarrierKind.DOWN_AND_OUT:
        raise DomainError("MEFD far-field data f ~ S applies to down-and-out calls only")
    t0 = time.perf_counter()
    s_max = config.s_max.resolve(contract.S0)
    if s_max <= contract.S0:
        raise DomainError("S_max must exceed S0")

    def far_edge(S_edge, rem):
        return np.full(rem.shape, S_edge)

    return _explicit(contract, market, config, s_max, far_edge, "approximate",
                     f"S_max rule {config.s_max}", t0)


def price_habis(contract: BarrierContract, market: MarketParams, M: int, L: Optional[int] = None,
                s_max: SMax = SMax(), policy: ThetaPolicy = ThetaPolicy(),
                cfg: CutoffConfig = CutoffConfig()) -> PriceReport:
    """High-order implicit scheme with the far edge at S_max and f ~ S data there."""
    require_valid(contract, market)
    if contract.monitoring.is_discrete or contract.kind is not BarrierKind.DOWN_AND_OUT:
        raise DomainError("HABIS is defined for continuously monitored down-and-out calls")
    t0 = time.perf_counter()
    L = default_time_steps(M, market.sigma) if L is None else L
    base = plan_continuous(contract, market, cfg)
    problem = to_heat(contract, market)
    S_max = s_max.resolve(contract.S0)
    x_max = math.log(S_max / contract.K)
    if x_max <= problem.x0:
        raise DomainError("S_max must exceed S0")
    lo_edge = base.lo_edge
    if lo_edge is None:
        # worthless-barrier plan: rebuild the barrier edge anyway
        xb = problem.x_b
        lo_edge = lambda t: rebate_value(xb, t, problem, contract.rebate)  # noqa: E731
    plan = ContinuousPlan(contract, problem.x_b, x_max, "hi", lo_edge,
                          lambda t: far_field_value(t, x_max, problem))
    fld = solve_plan(plan, market, M, L, policy)
    value, how = extract_price(fld.U, fld.grid, problem.x0, problem)
    return PriceReport(value, (fld.grid.M, fld.grid.L), time.perf_counter() - t0, "approximate",
                       how, fld.grid.L, (fld.grid.x_lo, fld.grid.x_hi), f"S_max {S_max:g}")


# -- error profiles -----------------------------------------------------------------

@dataclass(frozen=True)
class ErrorProfile:
    S: np.ndarray
    error: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.error)))


def closed_form(contract: BarrierContract, market: MarketParams, S):
    """Continuous knock-out closed form at spot(s) S (no spot-range checks)."""
    S = np.asarray(S, dtype=float)
    geo, Rb = contract.geometry, contract.rebate
    if contract.kind is BarrierKind.DOWN_AND_OUT:
        out = analytic._down_and_out(S, contract.K, geo.lower, contract.T, market.r, market.q,
                                     market.sigma, Rb)
    elif contract.kind is BarrierKind.UP_AND_OUT:
        out = analytic._up_and_out(S, contract.K, geo.upper, contract.T, market.r, market.q,
                                   market.sigma, Rb)
    else:
        inside = (S > geo.lower) & (S < geo.upper)
        out = np.full(S.shape, float(Rb))
        if np.any(inside):
            out[inside] = analytic._double_knock_out(S[inside], contract.K, geo.lower, geo.upper,
                                                     contract.T, market.r, market.q, market.sigma,
                                                     Rb, analytic.SeriesControl())
        return out
    for level in geo.levels:
        out = np.where(np.isclose(S, level, rtol=0, atol=1e-12 * level), Rb, out)
    return out


def error_profile(contract: BarrierContract, market: MarketParams, M: int, L: Optional[int] = None,
                  policy: ThetaPolicy = ThetaPolicy(), cfg: CutoffConfig = CutoffConfig()) -> ErrorProfile:
    """Numerical minus closed-form price at every node of the unaligned grid."""
    require_valid(contract, market)
    L = default_time_steps(M, market.sigma) if L is None else L
    plan = plan_continuous(contract, market, cfg, classify=False)
    if plan.short_circuit:
        raise DomainError("barrier is worthless for this contract: no PDE grid to profile")
    fld = solve_plan(plan, market, M, L, policy, align=False)
    S = fld.S
    return ErrorProfile(S, fld.prices - closed_form(contract, market, S))
