"""Theta-scheme solver for the heat-equation form of the barrier problem.

The default policy ties theta to the mesh ratio beta = dtau/dx^2 through
theta = 1/2 - 1/(12 beta), which cancels the leading spatial truncation term
and gives O(dtau^2 + dx^4) accuracy. Boundary values are imposed strongly on
both edges; interior unknowns form a constant tridiagonal system that is
solved with the Thomas algorithm at every step.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numba import njit

from . import analytic
from .boundary import (CutoffConfig, DoubleClass, barrier_worthless, classify_double,
                       single_cutoff)
from .contracts import (BarrierContract, BarrierGeometry, BarrierKind, MarketParams,
                        require_valid)
from .errors import AdmissibilityError, GeometryError, NumericalError
from .transform import (TransformedProblem, from_heat, heat_initial_condition,
                        rebate_value, to_heat, vanilla_boundary_value)

PIVOT_FLOOR = 1e-300


# -- theta policies -------------------------------------------------------------

def theta_from_beta(beta: float) -> float:
    """theta = 1/2 - 1/(12 beta); requires beta >= 1/6 so that theta >= 0."""
    if not beta >= 1.0 / 6.0 - 1e-14:
        raise AdmissibilityError(
            f"mesh ratio beta={beta:.6g} < 1/6: need dx^2 <= 6 dtau for the high-order theta")
    return max(0.5 - 1.0 / (12.0 * beta), 0.0)


class ThetaKind(str, Enum):
    HIGH_ORDER = "hobis"
    CRANK_NICOLSON = "cn"
    FULLY_IMPLICIT = "implicit"
    FIXED = "fixed"


@dataclass(frozen=True)
class ThetaPolicy:
    kind: ThetaKind = ThetaKind.HIGH_ORDER
    value: Optional[float] = None

    @classmethod
    def high_order(cls):
        return cls(ThetaKind.HIGH_ORDER)

    @classmethod
    def crank_nicolson(cls):
        return cls(ThetaKind.CRANK_NICOLSON)

    @classmethod
    def fully_implicit(cls):
        return cls(ThetaKind.FULLY_IMPLICIT)

    @classmethod
    def fixed(cls, theta: float):
        if not 0.0 <= theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        return cls(ThetaKind.FIXED, float(theta))

    def theta(self, beta: float) -> float:
        if self.kind is ThetaKind.HIGH_ORDER:
            return theta_from_beta(beta)
        if self.kind is ThetaKind.CRANK_NICOLSON:
            return 0.5
        if self.kind is ThetaKind.FULLY_IMPLICIT:
            return 1.0
        return self.value


def default_time_steps(M: int, sigma: float) -> int:
    """L = M, or L = ceil(1.5 M) for sigma >= 0.35 to suppress negative intermediate values."""
    return int(math.ceil(1.5 * M)) if sigma >= 0.35 else M


# -- grid -------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    M: int
    L: int
    x_lo: float
    x_hi: float
    tau_max: float
    aligned_index: Optional[int] = None
    midway: tuple = ()

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / self.M

    @property
    def dtau(self) -> float:
        return self.tau_max / self.L

    @property
    def beta(self) -> float:
        return self.dtau / self.dx ** 2

    @property
    def x(self) -> np.ndarray:
        return self.x_lo + self.dx * np.arange(self.M + 1)

    @property
    def tau(self) -> np.ndarray:
        return self.dtau * np.arange(self.L + 1)


def _snap(d: float, dx: float):
    """Integer j with j*dx == d up to rounding, else None."""
    j = round(d / dx)
    return j if abs(d - j * dx) <= 1e-9 * dx else None


def build_grid(x_lo: float, x_hi: float, tau_max: float, M: int, L: int,
               x0: Optional[float] = None, *, movable: Optional[str] = None,
               midway: tuple = (), policy: Optional[ThetaPolicy] = None) -> Grid:
    """Uniform grid over [x_lo, x_hi] x [0, tau_max].

    movable: "lo" or "hi" names a cutoff edge that may be pushed outward by
        less than one dx so that x0 falls on a node; M stays fixed.
    midway: barrier positions that must sit halfway between two nodes
        (discrete monitoring). Edges are pushed outward by less than one dx and
        M is adjusted to cover the requested interval.
    """
    if M < 2 or L < 1:
        raise GeometryError(f"mesh {M}x{L} too small: need M >= 2, L >= 1")
    if not x_lo < x_hi:
        raise GeometryError("empty space domain")
    if x0 is not None and not (x_lo - 1e-12 <= x0 <= x_hi + 1e-12) and not midway:
        raise GeometryError("x0 outside the solution domain")
    dx0 = (x_hi - x_lo) / M
    aligned = None

    if midway:
        if movable is not None:
            raise GeometryError("midway placement and a movable cutoff edge conflict")
        grid = _midway_grid(x_lo, x_hi, tau_max, M, L, x0, tuple(sorted(midway)), dx0)
    else:
        if x0 is not None:
            if movable == "hi":
                d = x0 - x_lo
            elif movable == "lo":
                d = x_hi - x0
            else:
                d = None
            j = _snap(x0 - x_lo, dx0)
            if j is not None:
                aligned = j
            elif d is not None:
                j = int(math.floor(d / dx0))
                if j >= 1:
                    dx = d / j
                    if M * dx - (x_hi - x_lo) < dx0:
                        if movable == "hi":
                            x_hi = x_lo + M * dx
                            aligned = j
                        else:
                            x_lo = x_hi - M * dx
                            aligned = M - j
        grid = Grid(M, L, x_lo, x_hi, tau_max, aligned)

    if policy is not None:
        policy.theta(grid.beta)
    return grid


def _midway_grid(x_lo, x_hi, tau_max, M, L, x0, barriers, dx0):
    if len(barriers) == 1:
        b = barriers[0]
        dx = dx0
        if x0 is not None:
            d = abs(x0 - b)
            if d >= 0.5 * dx0 * (2.0 / 3.0):
                m = max(0, int(math.floor(d / dx0 - 0.5)))
                candidates = [m, m + 1] + ([m - 1] if m >= 1 else [])
                best = min(candidates, key=lambda c: abs(math.log(d / (c + 0.5) / dx0)))
                # align x0 only if that keeps dx close to nominal; else interpolate
                if abs(math.log(d / (best + 0.5) / dx0)) <= math.log(4.0 / 3.0):
                    dx = d / (best + 0.5)
        lo_anchor = hi_anchor = b
        inner = 0
    else:
        bl, bu = barriers
        n = max(1, int(round((bu - bl) / dx0)))
        dx = (bu - bl) / n
        lo_anchor, hi_anchor, inner = bl, bu, n
    k_lo = max(0, int(math.ceil((lo_anchor - x_lo) / dx - 0.5 - 1e-12)))
    k_hi = max(0, int(math.ceil((x_hi - hi_anchor) / dx - 0.5 - 1e-12)))
    new_lo = lo_anchor - (k_lo + 0.5) * dx
    M_new = k_lo + k_hi + 1 + inner
    new_hi = new_lo + M_new * dx
    aligned = None
    if x0 is not None and new_lo <= x0 <= new_hi:
        aligned = _snap(x0 - new_lo, dx)
    return Grid(M_new, L, new_lo, new_hi, tau_max, aligned, barriers)


# -- linear algebra ---------------------------------------------------------------

@dataclass(frozen=True)
class TridiagonalSystem:
    """Implicit operator W (sub, diag, sup) and its explicit mirror for M-1 unknowns."""
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    ex_diag: float
    ex_off: float
    theta: float
    beta: float

    @property
    def size(self) -> int:
        return self.diag.shape[0]

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub[1:], -1) + np.diag(self.sup[:-1], 1)


def assemble(theta: float, beta: float, M: int) -> TridiagonalSystem:
    n = M - 1
    off = -beta * theta
    diag = np.full(n, 1.0 + 2.0 * beta * theta)
    sub = np.full(n, off)
    sup = np.full(n, off)
    sub[0] = 0.0
    sup[-1] = 0.0
    if theta > 0:
        assert np.all(np.abs(diag) > np.abs(sub) + np.abs(sup)), "implicit operator not diagonally dominant"
    return TridiagonalSystem(sub, diag, sup, 1.0 - 2.0 * beta * (1.0 - theta),
                             beta * (1.0 - theta), theta, beta)


@njit(cache=True, nogil=True)
def _thomas(sub, diag, sup, rhs):
    n = diag.shape[0]
    c = np.empty(n)
    d = np.empty(n)
    piv = diag[0]
    if abs(piv) < PIVOT_FLOOR:
        return c, False
    c[0] = sup[0] / piv
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - sub[i] * c[i - 1]
        if abs(piv) < PIVOT_FLOOR:
            return c, False
        c[i] = sup[i] / piv
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv
    x = d
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x, True


def thomas_solve(system_or_bands, rhs) -> np.ndarray:
    """Gaussian elimination without pivoting for a tridiagonal system.

    Accepts a :class:`TridiagonalSystem` or a (sub, diag, sup) tuple where
    sub[0] and sup[-1] are ignored.
    """
    if isinstance(system_or_bands, TridiagonalSystem):
        sub, diag, sup = system_or_bands.sub, system_or_bands.diag, system_or_bands.sup
    else:
        sub, diag, sup = system_or_bands
    sub = np.ascontiguousarray(sub, dtype=float)
    diag = np.ascontiguousarray(diag, dtype=float)
    sup = np.ascontiguousarray(sup, dtype=float)
    x, ok = _thomas(sub, diag, sup, np.ascontiguousarray(rhs, dtype=float))
    if not ok:
        raise NumericalError("zero pivot in tridiagonal solve")
    return x


@njit(cache=True, nogil=True)
def _march(U, lo, hi, start, nsteps, theta, beta):
    """Advance U in place by nsteps theta-steps; lo/hi hold edge values per level."""
    M = U.shape[0] - 1
    n = M - 1
    off = -beta * theta
    dg = 1.0 + 2.0 * beta * theta
    ed = 1.0 - 2.0 * beta * (1.0 - theta)
    eo = beta * (1.0 - theta)
    # forward-sweep factors of the constant matrix
    c = np.empty(n)
    inv = np.empty(n)
    inv[0] = 1.0 / dg
    c[0] = off * inv[0]
    for i in range(1, n):
        inv[i] = 1.0 / (dg - off * c[i - 1])
        c[i] = off * inv[i]
    rhs = np.empty(n)
    for s in range(nsteps):
        k = start + s + 1
        for i in range(n):
            rhs[i] = ed * U[i + 1] + eo * (U[i] + U[i + 2])
        rhs[0] -= off * lo[k]
        rhs[n - 1] -= off * hi[k]
        rhs[0] = rhs[0] * inv[0]
        for i in range(1, n):
            rhs[i] = (rhs[i] - off * rhs[i - 1]) * inv[i]
        for i in range(n - 2, -1, -1):
            rhs[i] -= c[i] * rhs[i + 1]
        for i in range(n):
            U[i + 1] = rhs[i]
        U[0] = lo[k]
        U[M] = hi[k]
    return U


def step(U_n, system: TridiagonalSystem, boundary_next) -> np.ndarray:
    """One theta step: returns U at level n+1 with edges set to ``boundary_next``."""
    U_n = np.asarray(U_n, dtype=float)
    lo, hi = boundary_next
    b, th = system.beta, system.theta
    rhs = system.ex_diag * U_n[1:-1] + system.ex_off * (U_n[:-2] + U_n[2:])
    rhs[0] += b * th * lo
    rhs[-1] += b * th * hi
    out = np.empty_like(U_n)
    out[1:-1] = thomas_solve(system, rhs)
    out[0], out[-1] = lo, hi
    return out


def march(U, grid: Grid, theta: float, lo_values, hi_values, start: int, nsteps: int) -> np.ndarray:
    """Advance U (in place) from level ``start`` by ``nsteps`` levels."""
    if nsteps <= 0:
        return U
    return _march(U, np.ascontiguousarray(lo_values, dtype=float),
                  np.ascontiguousarray(hi_values, dtype=float),
                  int(start), int(nsteps), float(theta), float(grid.beta))


# -- pricing ----------------------------------------------------------------------

@dataclass
class PriceReport:
    value: float
    mesh: tuple
    wall_time: float
    boundary_mode: str
    extraction: str
    pde_steps: int = 0
    domain: Optional[tuple] = None
    note: str = ""

    def summary(self) -> str:
        M, L = self.mesh
        return (f"value={self.value:.6g} mesh={M}x{L} boundary={self.boundary_mode} "
                f"extraction={self.extraction} wall_time={self.wall_time:.4f}s")


SHORT_CIRCUIT = "worthless-barrier short-circuit"


def lagrange_at(xs, ys, x):
    """Evaluate the interpolating polynomial through (xs, ys) at x."""
    total = 0.0
    for i in range(len(xs)):
        w = 1.0
        for j in range(len(xs)):
            if j != i:
                w *= (x - xs[j]) / (xs[i] - xs[j])
        total += w * ys[i]
    return total


def extract_price(U, grid: Grid, x0: float, problem: TransformedProblem):
    """Option value at (x0, tau_max): nodal value if aligned, else cubic interpolation.

    Returns (price, "aligned" | "interpolated").
    """
    tau = grid.tau_max
    if grid.aligned_index is not None:
        return from_heat(U[grid.aligned_index], x0, tau, problem), "aligned"
    if not grid.x_lo - 1e-12 <= x0 <= grid.x_hi + 1e-12:
        raise GeometryError("x0 outside the grid: refusing to extrapolate")
    j = _snap(x0 - grid.x_lo, grid.dx)
    if j is not None:
        return from_heat(U[j], x0, tau, problem), "aligned"
    xs = grid.x
    npts = min(4, grid.M + 1)
    i0 = int(math.floor((x0 - grid.x_lo) / grid.dx)) - (npts // 2 - 1)
    i0 = min(max(i0, 0), grid.M + 1 - npts)
    idx = slice(i0, i0 + npts)
    u0 = lagrange_at(xs[idx], U[idx], x0)
    return from_heat(u0, x0, tau, problem), "interpolated"


EdgeFn = Callable[[np.ndarray], np.ndarray]


@dataclass
class Field:
    """Solution at tau_max on every node together with its setup."""
    grid: Grid
    U: np.ndarray
    problem: TransformedProblem
    theta: float
    boundary_mode: str = "optimal"

    @property
    def S(self) -> np.ndarray:
        return self.problem.K * np.exp(self.grid.x)

    @property
    def prices(self) -> np.ndarray:
        return from_heat(self.U, self.grid.x, self.grid.tau_max, self.problem)


def solve_heat(u0, grid: Grid, lo_values, hi_values, policy: ThetaPolicy) -> np.ndarray:
    """March u_tau = u_xx from u0 over the whole grid; edges taken from the value arrays."""
    theta = policy.theta(grid.beta)
    U = np.array(u0, dtype=float)
    U[0], U[-1] = lo_values[0], hi_values[0]
    march(U, grid, theta, lo_values, hi_values, 0, grid.L)
    if not np.all(np.isfinite(U)):
        raise NumericalError("non-finite values in the solution")
    return U


def solve_field(problem: TransformedProblem, grid: Grid, lo_edge: EdgeFn, hi_edge: EdgeFn,
                policy: ThetaPolicy, boundary_mode: str = "optimal") -> Field:
    """March the transformed payoff from tau = 0 to tau_max with the given edge data."""
    taus = grid.tau
    lo = np.asarray(lo_edge(taus), dtype=float)
    hi = np.asarray(hi_edge(taus), dtype=float)
    U = solve_heat(heat_initial_condition(grid.x, problem), grid, lo, hi, policy)
    return Field(grid, U, problem, policy.theta(grid.beta), boundary_mode)


@dataclass(frozen=True)
class ContinuousPlan:
    """Domain and edge data for a continuously monitored knock-out."""
    contract: BarrierContract
    x_lo: float
    x_hi: float
    movable: Optional[str]
    lo_edge: EdgeFn
    hi_edge: EdgeFn
    short_circuit: bool = False
    note: str = ""


def _reduce_double(contract: BarrierContract, market: MarketParams, cfg: CutoffConfig):
    """Classify a double knock-out and return the contract that is actually priced."""
    cls = classify_double(contract, market, cfg)
    geo = contract.geometry
    if cls is DoubleClass.LOWER_ONLY:
        geo = BarrierGeometry.down_and_out(geo.lower)
    elif cls is DoubleClass.UPPER_ONLY:
        geo = BarrierGeometry.up_and_out(geo.upper)
    elif cls is DoubleClass.NEITHER_ACTIVE:
        return cls, None
    reduced = BarrierContract(contract.K, contract.T, contract.S0, geo, contract.rebate,
                              contract.monitoring)
    return cls, reduced


def plan_continuous(contract: BarrierContract, market: MarketParams,
                    cfg: CutoffConfig = CutoffConfig(), classify: bool = True) -> ContinuousPlan:
    """Domain and edge data; ``classify=False`` keeps both edges of a double barrier."""
    note = ""
    if contract.kind is BarrierKind.DOUBLE_KNOCK_OUT and classify:
        cls, reduced = _reduce_double(contract, market, cfg)
        note = f"double barrier classified {cls.value}"
        if reduced is None:
            return ContinuousPlan(contract, 0.0, 0.0, None, None, None, True, note)
        contract = reduced
    problem = to_heat(contract, market)
    Rb = contract.rebate
    kind = contract.kind
    if kind is BarrierKind.DOUBLE_KNOCK_OUT:
        a, b = problem.x_bl, problem.x_bu
        return ContinuousPlan(contract, a, b, None,
                              lambda t: rebate_value(a, t, problem, Rb),
                              lambda t: rebate_value(b, t, problem, Rb), note=note)
    side = "down" if kind is BarrierKind.DOWN_AND_OUT else "up"
    cut = single_cutoff(side, contract.geometry.barrier, contract.K, contract.T, market, cfg)
    if barrier_worthless(contract.S0, cut):
        return ContinuousPlan(contract, 0.0, 0.0, None, None, None, True, note)
    xb = cut.x_b
    barrier_edge = lambda t: rebate_value(xb, t, problem, Rb)  # noqa: E731
    if side == "down":
        return ContinuousPlan(contract, xb, cut.x_m, "hi", barrier_edge, None, note=note)
    return ContinuousPlan(contract, cut.x_m, xb, "lo", None, barrier_edge, note=note)


def _vanilla_report(contract, market, t0, note=""):
    value = analytic.vanilla_call(contract.S0, contract.K, contract.T, market.r, market.q, market.sigma)
    return PriceReport(value, (0, 0), time.perf_counter() - t0, SHORT_CIRCUIT, "none", 0, None, note)


def price_continuous(contract: BarrierContract, market: MarketParams, M: int,
                     L: Optional[int] = None, policy: ThetaPolicy = ThetaPolicy(),
                     cfg: CutoffConfig = CutoffConfig()) -> PriceReport:
    """Continuously monitored knock-out call on the optimally truncated domain."""
    require_valid(contract, market)
    if contract.monitoring.is_discrete:
        raise ValueError("price_continuous needs continuous monitoring; see discrete.price_discrete")
    t0 = time.perf_counter()
    L = default_time_steps(M, market.sigma) if L is None else L
    plan = plan_continuous(contract, market, cfg)
    if plan.short_circuit:
        return _vanilla_report(contract, market, t0, plan.note)
    field = solve_plan(plan, market, M, L, policy)
    value, how = extract_price(field.U, field.grid, field.problem.x0, field.problem)
    return PriceReport(value, (field.grid.M, field.grid.L), time.perf_counter() - t0, "optimal", how,
                       field.grid.L, (field.grid.x_lo, field.grid.x_hi), plan.note)


def solve_plan(plan: ContinuousPlan, market: MarketParams, M: int, L: int,
               policy: ThetaPolicy, align: bool = True) -> Field:
    problem = to_heat(plan.contract, market)
    x0 = problem.x0 if align else None
    grid = build_grid(plan.x_lo, plan.x_hi, problem.tau_max, M, L, x0,
                      movable=plan.movable, policy=policy)
    lo_edge = plan.lo_edge or (lambda t: vanilla_boundary_value(t, grid.x_lo, problem, market))
    hi_edge = plan.hi_edge or (lambda t: vanilla_boundary_value(t, grid.x_hi, problem, market))
    return solve_field(problem, grid, lo_edge, hi_edge, policy)
