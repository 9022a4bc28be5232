"""Probability-based truncation of the solution domain.

Beyond the cutoff S_m the barrier cannot be reached before expiry with
probability Phi(delta), which is 1 at working precision, so the option is a
plain vanilla call there and its value on the cutoff edge is known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .analytic import norm_cdf
from .contracts import BarrierContract, BarrierKind, MarketParams
from .errors import DomainError

DEFAULT_DELTA = 4.2


@dataclass(frozen=True)
class CutoffConfig:
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not 3.7 < self.delta < 6.5:
            raise ValueError(f"delta must lie in (3.7, 6.5), got {self.delta}")


class Side(str, Enum):
    UPPER = "upper"  # cutoff above a down barrier
    LOWER = "lower"  # cutoff below an up barrier


@dataclass(frozen=True)
class DomainCutoff:
    x_m: float
    S_m: float
    side: Side
    t_p_used: bool
    x_b: float


def drift_star(market: MarketParams) -> float:
    """Log-price drift mu* = r - q - sigma^2/2."""
    return market.r - market.q - 0.5 * market.sigma ** 2


def breach_probability_complement(S0, B, t, market: MarketParams, side: str = "down"):
    """Probability that S_t lies on the live side of B (S_t > B for a down barrier)."""
    if not t > 0:
        raise DomainError("t must be positive")
    a = (math.log(S0 / B) + drift_star(market) * t) / (market.sigma * math.sqrt(t))
    return norm_cdf(a if side == "down" else -a)


def turning_point(mu_star: float, sigma: float, delta: float, side: str = "down") -> Optional[float]:
    """Turning point of t -> delta*sigma*sqrt(t) -/+ mu* t, or None when monotone.

    For a down barrier the gap delta*sigma*sqrt(t) - mu* t peaks only if mu* > 0;
    for an up barrier delta*sigma*sqrt(t) + mu* t peaks only if mu* < 0.
    """
    if (side == "down" and mu_star <= 0) or (side == "up" and mu_star >= 0):
        return None
    return (delta * sigma / (2.0 * abs(mu_star))) ** 2


def _gap(barrier_side: str, T: float, market: MarketParams, delta: float):
    mu_s = drift_star(market)
    sigma = market.sigma
    t_p = turning_point(mu_s, sigma, delta, barrier_side)
    t = T if t_p is None or t_p >= T else t_p
    sign = -1.0 if barrier_side == "down" else 1.0
    return delta * sigma * math.sqrt(t) + sign * mu_s * t, t != T


def single_cutoff(barrier_side: str, B: float, K: float, T: float, market: MarketParams,
                  cfg: CutoffConfig = CutoffConfig()) -> DomainCutoff:
    """Cutoff for one barrier level; ``barrier_side`` is "down" or "up"."""
    x_b = math.log(B / K)
    gap, used = _gap(barrier_side, T, market, cfg.delta)
    if barrier_side == "down":
        x_m, side = x_b + gap, Side.UPPER
    else:
        x_m, side = x_b - gap, Side.LOWER
    return DomainCutoff(x_m=x_m, S_m=K * math.exp(x_m), side=side, t_p_used=used, x_b=x_b)


def cutoff(contract: BarrierContract, market: MarketParams,
           cfg: CutoffConfig = CutoffConfig()) -> DomainCutoff:
    kind = contract.kind
    if kind is BarrierKind.DOUBLE_KNOCK_OUT:
        raise ValueError("double barriers: use classify_double / single_cutoff per side")
    side = "down" if kind is BarrierKind.DOWN_AND_OUT else "up"
    return single_cutoff(side, contract.geometry.barrier, contract.K, contract.T, market, cfg)


def barrier_worthless(S0: float, cut: DomainCutoff) -> bool:
    if cut.side is Side.UPPER:
        return S0 >= cut.S_m
    return S0 <= cut.S_m


class DoubleClass(str, Enum):
    BOTH_ACTIVE = "both"
    LOWER_ONLY = "lower"
    UPPER_ONLY = "upper"
    NEITHER_ACTIVE = "neither"


def classify_double(contract: BarrierContract, market: MarketParams,
                    cfg: CutoffConfig = CutoffConfig()) -> DoubleClass:
    """Drop each barrier of a double knock-out that is worthless seen from S0."""
    geo = contract.geometry
    if geo.kind is not BarrierKind.DOUBLE_KNOCK_OUT:
        raise ValueError("classify_double needs a double knock-out")
    low = single_cutoff("down", geo.lower, contract.K, contract.T, market, cfg)
    up = single_cutoff("up", geo.upper, contract.K, contract.T, market, cfg)
    lower_active = not barrier_worthless(contract.S0, low)
    upper_active = not barrier_worthless(contract.S0, up)
    if lower_active and upper_active:
        return DoubleClass.BOTH_ACTIVE
    if lower_active:
        return DoubleClass.LOWER_ONLY
    if upper_active:
        return DoubleClass.UPPER_ONLY
    return DoubleClass.NEITHER_ACTIVE
