"""Black-Scholes to heat-equation change of variables.

With x = ln(S/K), tau = sigma^2 (T - t) / 2 and f = K exp(alpha x + gamma tau) u,
the pricing equation becomes u_tau = u_xx. Everything the solvers need to move
between the two worlds lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analytic
from .contracts import BarrierContract, BarrierKind, MarketParams, require_valid


@dataclass(frozen=True)
class TransformedProblem:
    nu: float
    nu1: float
    nu2: float
    alpha: float
    gamma: float
    tau_max: float
    K: float
    sigma: float
    x0: float
    x_bl: Optional[float] = None
    x_bu: Optional[float] = None

    @property
    def x_b(self) -> float:
        """Log-moneyness of the single barrier."""
        if self.x_bl is not None and self.x_bu is None:
            return self.x_bl
        if self.x_bu is not None and self.x_bl is None:
            return self.x_bu
        raise AttributeError("double barrier problem: use x_bl / x_bu")

    def remaining_time(self, tau):
        """Time to expiry (years) corresponding to heat time tau."""
        return 2.0 * tau / (self.sigma * self.sigma)

    def scale(self, x, tau):
        """The exact factor K exp(alpha x + gamma tau) linking f and u."""
        return self.K * np.exp(self.alpha * x + self.gamma * tau)


def heat_coefficients(market: MarketParams):
    """Return (nu, nu1, nu2, alpha, gamma) for the given market."""
    s2 = market.sigma * market.sigma
    nu1 = 2.0 * market.r / s2
    nu2 = 2.0 * market.q / s2
    nu = nu1 - nu2
    alpha = -0.5 * (nu - 1.0)
    gamma = -0.25 * (nu + 1.0) ** 2 - nu2
    return nu, nu1, nu2, alpha, gamma


def to_heat(contract: BarrierContract, market: MarketParams) -> TransformedProblem:
    require_valid(contract, market)
    nu, nu1, nu2, alpha, gamma = heat_coefficients(market)
    K = contract.K
    geo = contract.geometry
    x_bl = math.log(geo.lower / K) if geo.kind in (BarrierKind.DOWN_AND_OUT, BarrierKind.DOUBLE_KNOCK_OUT) else None
    x_bu = math.log(geo.upper / K) if geo.kind in (BarrierKind.UP_AND_OUT, BarrierKind.DOUBLE_KNOCK_OUT) else None
    return TransformedProblem(
        nu=nu, nu1=nu1, nu2=nu2, alpha=alpha, gamma=gamma,
        tau_max=0.5 * market.sigma ** 2 * contract.T,
        K=K, sigma=market.sigma, x0=math.log(contract.S0 / K),
        x_bl=x_bl, x_bu=x_bu,
    )


def heat_initial_condition(x, problem: TransformedProblem):
    """Transformed call payoff max(e^{(nu+1)x/2} - e^{(nu-1)x/2}, 0)."""
    x = np.asarray(x, dtype=float)
    nu = problem.nu
    u = np.maximum(np.exp(0.5 * (nu + 1) * x) - np.exp(0.5 * (nu - 1) * x), 0.0)
    return float(u) if u.ndim == 0 else u


def rebate_value(x, tau, problem: TransformedProblem, rebate: float):
    """Heat-space image of a cash amount ``rebate`` received at (x, tau)."""
    return rebate / problem.K * np.exp(-(problem.alpha * np.asarray(x) + problem.gamma * tau))


def barrier_boundary_value(tau, problem: TransformedProblem, rebate: float, x_b: Optional[float] = None):
    """u on the barrier edge: (Rb/K) exp(-(alpha x_b + gamma tau))."""
    xb = problem.x_b if x_b is None else x_b
    value = rebate_value(xb, tau, problem, rebate)
    return float(value) if np.ndim(value) == 0 else value


def from_heat(u, x, tau, problem: TransformedProblem):
    """Map heat-space values back to option prices."""
    f = problem.scale(x, tau) * np.asarray(u, dtype=float)
    return float(f) if np.ndim(f) == 0 else f


def to_u(f, x, tau, problem: TransformedProblem):
    """Inverse of :func:`from_heat`."""
    u = np.asarray(f, dtype=float) / problem.scale(x, tau)
    return float(u) if np.ndim(u) == 0 else u


def vanilla_boundary_value(tau, x_m: float, problem: TransformedProblem, market: MarketParams):
    """Exact u on a cutoff edge where the option equals the vanilla call.

    tau = 0 is expiry (payoff), tau = tau_max is the valuation date.
    """
    tau = np.asarray(tau, dtype=float)
    S_m = problem.K * math.exp(x_m)
    f = analytic.vanilla_call_curve(S_m, problem.K, problem.remaining_time(tau),
                                    market.r, market.q, market.sigma)
    return to_u(f, x_m, tau, problem)


def far_field_value(tau, x_max: float, problem: TransformedProblem):
    """Asymptotic u ~ exp((1 - alpha) x - gamma tau), i.e. f ~ S (comparison schemes only)."""
    u = np.exp((1 - problem.alpha) * x_max - problem.gamma * np.asarray(tau, dtype=float))
    return float(u) if np.ndim(u) == 0 else u
