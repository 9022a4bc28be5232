"""Closed-form prices used as oracles and as exact boundary data.

Single barriers follow the Reiner-Rubinstein formulas (rebate paid at the
hitting time). The double knock-out uses the image (Kunitomo-Ikeda) series,
written in heat-equation coordinates so that any strike position relative
to the corridor is handled by the same code path; a rebate on a double
barrier is added through the Fourier sine series of the corridor problem.

Every function accepts numpy arrays for the spot argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, NumericalError


def norm_cdf(x):
    """Standard normal distribution function (erfc based, ~1e-16 absolute)."""
    return ndtr(x)


@dataclass(frozen=True)
class SeriesControl:
    max_terms: int = 200
    term_tolerance: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.term_tolerance > 0:
            raise ValueError("term_tolerance must be positive")


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_positive(T, sigma):
    if not T > 0:
        raise DomainError("T must be positive")
    if not sigma > 0:
        raise DomainError("sigma must be positive")


def vanilla_call(S0, K, T, r, q, sigma):
    """Black-Scholes call on an asset paying a continuous dividend yield."""
    _check_positive(T, sigma)
    S = np.asarray(S0, dtype=float)
    sq = sigma * math.sqrt(T)
    with np.errstate(divide="ignore"):
        d1 = (np.log(S / K) + (r - q + 0.5 * sigma * sigma) * T) / sq
    d2 = d1 - sq
    return _out(S * math.exp(-q * T) * ndtr(d1) - K * math.exp(-r * T) * ndtr(d2))


def vanilla_call_curve(S, K, remaining, r, q, sigma):
    """Vanilla call at fixed spot S over an array of remaining maturities.

    Entries with zero remaining time return the payoff max(S - K, 0).
    """
    t = np.asarray(remaining, dtype=float)
    out = np.full(t.shape, max(S - K, 0.0))
    live = t > 0
    if np.any(live):
        tl = t[live]
        sq = sigma * np.sqrt(tl)
        d1 = (math.log(S / K) + (r - q + 0.5 * sigma * sigma) * tl) / sq
        out[live] = S * np.exp(-q * tl) * ndtr(d1) - K * np.exp(-r * tl) * ndtr(d1 - sq)
    return out


class _RR:
    """Reiner-Rubinstein building blocks A, B, C, D, F (Haug's notation)."""

    def __init__(self, S, K, H, T, r, q, sigma, eta):
        self.S = S = np.asarray(S, dtype=float)
        self.K, self.H, self.T, self.r = K, H, T, r
        self.eta = eta
        b = r - q
        self.sq = sq = sigma * math.sqrt(T)
        self.mu = mu = (b - 0.5 * sigma * sigma) / (sigma * sigma)
        self.carry = math.exp((b - r) * T)
        self.disc = math.exp(-r * T)
        self.lam2 = mu * mu + 2.0 * r / (sigma * sigma)
        self.x1 = np.log(S / K) / sq + (1 + mu) * sq
        self.x2 = np.log(S / H) / sq + (1 + mu) * sq
        self.y1 = np.log(H * H / (S * K)) / sq + (1 + mu) * sq
        self.y2 = np.log(H / S) / sq + (1 + mu) * sq

    def A(self):
        return self.S * self.carry * ndtr(self.x1) - self.K * self.disc * ndtr(self.x1 - self.sq)

    def B(self):
        return self.S * self.carry * ndtr(self.x2) - self.K * self.disc * ndtr(self.x2 - self.sq)

    def _reflected(self, y):
        e, hs = self.eta, self.H / self.S
        return (self.S * self.carry * hs ** (2 * (self.mu + 1)) * ndtr(e * y)
                - self.K * self.disc * hs ** (2 * self.mu) * ndtr(e * y - e * self.sq))

    def C(self):
        return self._reflected(self.y1)

    def D(self):
        return self._reflected(self.y2)

    def F(self, rebate):
        if rebate == 0:
            return 0.0
        if self.lam2 < 0:
            raise DomainError("rebate value undefined for mu^2 + 2r/sigma^2 < 0")
        lam = math.sqrt(self.lam2)
        e, hs = self.eta, self.H / self.S
        z = np.log(hs) / self.sq + lam * self.sq
        return rebate * (hs ** (self.mu + lam) * ndtr(e * z)
                         + hs ** (self.mu - lam) * ndtr(e * z - 2 * e * lam * self.sq))


def _down_and_out(S0, K, B, T, r, q, sigma, rebate=0.0):
    rr = _RR(S0, K, B, T, r, q, sigma, eta=1)
    core = rr.A() - rr.C() if K > B else rr.B() - rr.D()
    return core + rr.F(rebate)


def _up_and_out(S0, K, B, T, r, q, sigma, rebate=0.0):
    rr = _RR(S0, K, B, T, r, q, sigma, eta=-1)
    core = 0.0 if K >= B else rr.A() - rr.B() + rr.C() - rr.D()
    return core + rr.F(rebate)


def down_and_out_call(S0, K, B, T, r, q, sigma, rebate=0.0):
    """Continuously monitored down-and-out call with rebate paid at the hit."""
    _check_positive(T, sigma)
    if np.any(np.asarray(S0) <= B):
        raise DomainError("down-and-out requires S0 > B")
    return _out(_down_and_out(S0, K, B, T, r, q, sigma, rebate))


def up_and_out_call(S0, K, B, T, r, q, sigma, rebate=0.0):
    """Continuously monitored up-and-out call with rebate paid at the hit."""
    _check_positive(T, sigma)
    if np.any(np.asarray(S0) >= B):
        raise DomainError("up-and-out requires S0 < B")
    return _out(_up_and_out(S0, K, B, T, r, q, sigma, rebate))


def down_and_in_call(S0, K, B, T, r, q, sigma):
    """Down-and-in call without rebate, from its own closed form."""
    _check_positive(T, sigma)
    if np.any(np.asarray(S0) <= B):
        raise DomainError("down-and-in requires S0 > B")
    rr = _RR(S0, K, B, T, r, q, sigma, eta=1)
    return _out(rr.C() if K > B else rr.A() - rr.B() + rr.D())


def up_and_in_call(S0, K, B, T, r, q, sigma):
    """Up-and-in call without rebate, from its own closed form."""
    _check_positive(T, sigma)
    if np.any(np.asarray(S0) >= B):
        raise DomainError("up-and-in requires S0 < B")
    rr = _RR(S0, K, B, T, r, q, sigma, eta=-1)
    return _out(rr.A() if K >= B else rr.B() - rr.C() + rr.D())


def knock_in_from_parity(knock_out_price, vanilla_price, rebate=0.0):
    """Knock-in value as vanilla minus knock-out (zero rebate only)."""
    if rebate != 0:
        raise DomainError("knock-in/knock-out parity requires zero rebate")
    return vanilla_price - knock_out_price


# -- double barrier -------------------------------------------------------------

def _heat_parameters(r, q, sigma):
    nu1 = 2 * r / sigma ** 2
    nu2 = 2 * q / sigma ** 2
    nu = nu1 - nu2
    alpha = -0.5 * (nu - 1)
    gamma = -0.25 * (nu + 1) ** 2 - nu2
    return nu, alpha, gamma


def _gauss_exp(k, shift, lo, hi, tau):
    """Integral over y in [lo, hi] of G(y - shift) * exp(k*y), G the heat kernel at tau."""
    s = math.sqrt(2 * tau)
    m = shift + 2 * k * tau
    return np.exp(k * shift + k * k * tau) * (ndtr((hi - m) / s) - ndtr((lo - m) / s))


def _image_series(x, tau, a, b, pieces, ctl):
    """Solve u_t = u_xx on (a, b), u = 0 on both edges, at (x, tau).

    ``pieces`` is a list of (coefficient, k, lo, hi): the initial data is the
    sum of coefficient * exp(k*y) restricted to [lo, hi].
    """
    span = b - a

    def term(n):
        total = 0.0
        for coef, k, lo, hi in pieces:
            direct = x + 2 * n * span
            mirror = 2 * a - x + 2 * n * span
            total = total + coef * (_gauss_exp(k, direct, lo, hi, tau)
                                    - _gauss_exp(k, mirror, lo, hi, tau))
        return total

    value = term(0)
    for n in range(1, ctl.max_terms + 1):
        t = term(n) + term(-n)
        value = value + t
        if np.all(np.abs(t) < ctl.term_tolerance):
            return value
    raise NumericalError(f"image series did not converge in {ctl.max_terms} terms")


def _corridor_rebate(x, tau, a, b, g_a, g_b, c, ctl):
    """Heat solution on (a, b) from zero data with edge values g*exp(c*tau).

    Written as exp(c*tau)*phi(x) minus the sine series that removes phi at
    tau = 0, where phi'' = c*phi with phi(a) = g_a, phi(b) = g_b.
    """
    span = b - a
    if c > 0:
        s = math.sqrt(c)
        phi = (g_a * np.sinh(s * (b - x)) + g_b * np.sinh(s * (x - a))) / math.sinh(s * span)
    elif c == 0:
        phi = g_a + (g_b - g_a) * (x - a) / span
    else:
        s = math.sqrt(-c)
        den = math.sin(s * span)
        if abs(den) < 1e-12:
            raise NumericalError("resonant corridor: rebate series undefined")
        phi = (g_a * np.sin(s * (b - x)) + g_b * np.sin(s * (x - a))) / den
    steady = math.exp(c * tau) * phi
    correction = 0.0
    amp = abs(g_a) + abs(g_b)
    for k in range(1, 100 * ctl.max_terms + 1):
        kappa = k * math.pi / span
        bk = 2.0 / span * kappa * (g_a - (-1) ** k * g_b) / (c + kappa * kappa)
        decay = math.exp(-kappa * kappa * tau)
        correction = correction + bk * decay * np.sin(kappa * (x - a))
        envelope = 2.0 / span * kappa * amp / abs(c + kappa * kappa) * decay
        if kappa * kappa > abs(c) and envelope < ctl.term_tolerance:
            return steady - correction
    raise NumericalError("corridor rebate series did not converge")


def double_knock_out_call(S0, K, B_l, B_u, T, r, q, sigma, rebate=0.0, ctl=None):
    """Continuously monitored double knock-out call.

    The rebate, if any, is paid at whichever barrier is hit first.
    """
    _check_positive(T, sigma)
    ctl = ctl or SeriesControl()
    S = np.asarray(S0, dtype=float)
    if not B_l < B_u:
        raise DomainError("B_l < B_u required")
    if np.any(S <= B_l) or np.any(S >= B_u):
        raise DomainError("double knock-out requires B_l < S0 < B_u")
    return _out(_double_knock_out(S, K, B_l, B_u, T, r, q, sigma, rebate, ctl))


def _double_knock_out(S, K, B_l, B_u, T, r, q, sigma, rebate, ctl):
    nu, alpha, gamma = _heat_parameters(r, q, sigma)
    x = np.log(S / K)
    tau = 0.5 * sigma * sigma * T
    a, b = math.log(B_l / K), math.log(B_u / K)
    lo = max(a, 0.0)
    u = 0.0
    if lo < b:
        pieces = [(1.0, 0.5 * (nu + 1), lo, b), (-1.0, 0.5 * (nu - 1), lo, b)]
        u = _image_series(x, tau, a, b, pieces, ctl)
    if rebate:
        g_a = rebate / K * math.exp(-alpha * a)
        g_b = rebate / K * math.exp(-alpha * b)
        u = u + _corridor_rebate(x, tau, a, b, g_a, g_b, -gamma, ctl)
    return K * np.exp(alpha * x + gamma * tau) * u
