"""Acceptance criteria 1-12.

Run ``python tests/test_acceptance.py`` for one PASS/FAIL line per criterion,
or collect with pytest (``pytest tests/test_acceptance.py -s`` shows the lines).
"""

from __future__ import annotations

import math
import sys

import numpy as np
import pytest

from barrierfd import (BarrierContract, BarrierGeometry, CutoffConfig, MarketParams, MonitoringPolicy,
                       ThetaPolicy, double_knock_out_call, down_and_in_call, down_and_out_call,
                       price_continuous, price_discrete, run_table, up_and_in_call, up_and_out_call,
                       vanilla_call)
from barrierfd.boundary import single_cutoff
from barrierfd.engine import SHORT_CIRCUIT, thomas_solve
from barrierfd.harness import closed_form_reference, heat_kernel_ladder, load_references
from barrierfd.schemes import error_profile

WORKERS = 4


def _fails(cells):
    return [f"{c.cell}: {c.computed} vs {c.reference}" for c in cells if c.passed is False]


def criterion_1():
    checks = [
        (down_and_out_call(95, 100, 90, 1, 0.10, 0, 0.25), 5.9968, 5e-4),
        (down_and_out_call(91, 100, 90, 1, 0.10, 0, 0.25), 1.2738, 5e-4),
        (down_and_out_call(95, 100, 90, 1, 0.10, 0, 0.30), 5.9060, 5e-4),
        (down_and_out_call(95, 100, 90, 1, 0.10, 0, 0.40), 5.7502, 5e-4),
        (down_and_out_call(271.905, 150, 180, 0.25, 0.05, 0, 0.20), 123.768, 2e-3),
        (down_and_out_call(180.001, 150, 180, 0.25, 0.05, 0, 0.20), 0.0026, 2e-3),
        (down_and_out_call(225.953, 150, 180, 0.25, 0.05, 0, 0.20), 77.2335, 2e-3),
        (down_and_out_call(1345.07, 150, 180, 1.0, 0.07, 0, 0.45), 1205.21, 2e-3),
        (down_and_out_call(762.54, 150, 180, 1.0, 0.07, 0, 0.45), 622.632, 2e-3),
    ]
    worst = max(abs(v - ref) for v, ref, _ in checks)
    ok = all(abs(v - ref) <= tol for v, ref, tol in checks)
    return ok, f"9 closed-form values, worst deviation {worst:.2e}"


def criterion_2():
    m = MarketParams(0.10, 0.0, 0.20)
    down = price_continuous(BarrierContract(100, 0.5, 100, BarrierGeometry.down_and_out(99.9)), m, 200)
    dbl = price_continuous(BarrierContract(100, 0.5, 100, BarrierGeometry.double_knock_out(95, 125)), m, 200)
    ok = abs(down.value - 0.165) <= 2e-3 and abs(dbl.value - 2.033) <= 2e-3
    t3 = run_table("T3", WORKERS)
    small = [c for c in t3.cells if c.quantity == "mesh" and c.scheme == "hobis" and c.check == "le"]
    bad = [c for c in small if not c.passed]
    ok = ok and bool(small) and not bad
    return ok, (f"continuous {down.value:.5f} / {dbl.value:.5f} at 200x200; "
                f"{len(small) - len(bad)}/{len(small)} boundary-adjacent rows at mesh <= 25x25")


def criterion_3():
    c = BarrierContract(100, 0.5, 100, BarrierGeometry.down_and_out(90))
    m = MarketParams(0.10, 0.0, 0.15)
    e20 = error_profile(c, m, 20).max_abs
    e100 = error_profile(c, m, 100).max_abs
    d = BarrierContract(100, 0.5, 100, BarrierGeometry.double_knock_out(75, 125))
    e_dbl = error_profile(d, m, 100).max_abs
    ok = e20 <= 5e-3 and e100 <= 1e-4 and e_dbl <= 1e-2
    return ok, f"down 20x20 {e20:.2e}, 100x100 {e100:.2e}; double 100x100 {e_dbl:.2e}"


def criterion_4():
    ref = load_references()["T6"]
    m = MarketParams(0.10, 0.0, 0.20)
    dev_h, dev_w = [], []
    for N, B, hobis, wh, *_ in ref["rows"]:
        c = BarrierContract(100, 0.5, 100, BarrierGeometry.down_and_out(B),
                            monitoring=MonitoringPolicy.explicit(int(N)))
        v = price_discrete(c, m, ref["mesh"]).value
        dev_h.append(abs(v - hobis))
        dev_w.append(abs(v - wh))
    ok = max(dev_h) <= 5e-3 and max(dev_w) <= 1e-2
    return ok, f"6 discrete values, worst vs reference {max(dev_h):.2e}, vs Wiener-Hopf {max(dev_w):.2e}"


def criterion_5():
    c = BarrierContract(100, 0.5, 100, BarrierGeometry.down_and_out(90))
    m = MarketParams(0.10, 0.0, 0.20)
    cfg = CutoffConfig(4.5)
    policies = (ThetaPolicy.high_order(), ThetaPolicy.crank_nicolson(), ThetaPolicy.fully_implicit())
    errs = [error_profile(c, m, 40, policy=p, cfg=cfg).max_abs for p in policies]
    refs = (0.00193, 0.00466, 0.02392)
    ok = errs[0] < errs[1] < errs[2] and all(r / 2 <= e <= 2 * r for e, r in zip(errs, refs))
    return ok, "max errors hobis {:.3g}, cn {:.3g}, implicit {:.3g}".format(*errs)


def criterion_6():
    t1 = run_table("T1", WORKERS)
    explicit = [c for c in t1.cells if c.check == "abs" and c.scheme == "obes"]
    diverge = [c for c in t1.cells if c.check == "gt"]
    at_1000 = next(c for c in diverge if c.cell.endswith("L=1000"))
    bad = _fails(explicit)
    ok = not bad and all(c.passed for c in diverge)
    detail = (f"OBES cells within 1e-3: {len(explicit) - len(bad)}/{len(explicit)}; "
              f"MEFD 2S0 error at L=1000 {at_1000.computed:.3f}")
    if bad:
        rows = sorted({c.cell.split("L=")[1] for c in explicit if c.passed is False}, key=int)
        detail += f"; misses at L = {', '.join(rows)}"
    return ok, detail


def _random_contract(rng):
    K, T = rng.uniform(80, 120), rng.uniform(0.25, 1.5)
    m = MarketParams(rng.uniform(0, 0.1), rng.uniform(0, 0.05), rng.uniform(0.15, 0.45))
    kind = rng.integers(3)
    if kind == 0:
        geo = BarrierGeometry.down_and_out(rng.uniform(70, 97))
    elif kind == 1:
        geo = BarrierGeometry.up_and_out(rng.uniform(103, 160))
    else:
        geo = BarrierGeometry.double_knock_out(rng.uniform(60, 95), rng.uniform(105, 170))
    return BarrierContract(K, T, 100.0, geo), m


def criterion_7():
    rng = np.random.default_rng(2024)
    worst_a = worst_n = 0.0
    for _ in range(50):
        c, m = _random_contract(rng)
        van = vanilla_call(100.0, c.K, c.T, m.r, m.q, m.sigma)
        args = (100.0, c.K)
        geo = c.geometry
        if geo.kind.value == "down":
            ko = down_and_out_call(*args, geo.lower, c.T, m.r, m.q, m.sigma)
            ki = down_and_in_call(*args, geo.lower, c.T, m.r, m.q, m.sigma)
        elif geo.kind.value == "up":
            ko = up_and_out_call(*args, geo.upper, c.T, m.r, m.q, m.sigma)
            ki = up_and_in_call(*args, geo.upper, c.T, m.r, m.q, m.sigma)
        else:
            ko = double_knock_out_call(*args, geo.lower, geo.upper, c.T, m.r, m.q, m.sigma)
            ki = van - ko
        worst_a = max(worst_a, abs(ki + ko - van))
        numeric_ko = price_continuous(c, m, 200).value
        # numeric knock-in by parity against the analytic knock-in
        worst_n = max(worst_n, abs((van - numeric_ko) - ki))
    ok = worst_a <= 1e-10 and worst_n <= 5e-3
    return ok, f"50 cases, analytic parity {worst_a:.1e}, numeric (200x200) {worst_n:.1e} <= 5e-3"


def criterion_8():
    rng = np.random.default_rng(8)
    worst = -math.inf
    for _ in range(20):
        K, T = rng.uniform(85, 115), rng.uniform(0.25, 1.0)
        m = MarketParams(rng.uniform(0, 0.1), rng.uniform(0, 0.05), rng.uniform(0.15, 0.4))
        kind = rng.integers(3)
        if kind == 0:
            geo = BarrierGeometry.down_and_out(rng.uniform(80, 99))
        elif kind == 1:
            geo = BarrierGeometry.up_and_out(rng.uniform(101, 140))
        else:
            geo = BarrierGeometry.double_knock_out(rng.uniform(75, 98), rng.uniform(102, 140))
        mon = MonitoringPolicy.daily() if rng.integers(2) else MonitoringPolicy.weekly()
        c = BarrierContract(K, T, 100.0, geo)
        d = price_discrete(BarrierContract(K, T, 100.0, geo, monitoring=mon), m, 400).value
        cont = closed_form_reference(c, m)
        van = vanilla_call(100.0, K, T, m.r, m.q, m.sigma)
        worst = max(worst, cont - d, d - van)
    ok = worst <= 1e-6
    return ok, f"20 cases, largest chain violation {worst:.2e} (slack 1e-6)"


def criterion_9():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 201))
        sub, sup = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        sub[0] = sup[-1] = 0.0
        diag = (np.abs(sub) + np.abs(sup) + rng.uniform(0.1, 2, n)) * rng.choice([-1, 1], n)
        A = np.diag(diag) + np.diag(sub[1:], -1) + np.diag(sup[:-1], 1)
        b = rng.normal(size=n)
        worst = max(worst, float(np.max(np.abs(thomas_solve((sub, diag, sup), b) - np.linalg.solve(A, b)))))
    return worst <= 1e-11, f"100 systems, worst difference {worst:.1e}"


def criterion_10():
    space = heat_kernel_ladder(ThetaPolicy.high_order(), "space").order
    time_ = heat_kernel_ladder(ThetaPolicy.high_order(), "time").order
    cn = heat_kernel_ladder(ThetaPolicy.crank_nicolson(), "space").order
    ok = space >= 3.5 and time_ >= 1.8 and cn <= 2.5
    return ok, f"spatial {space:.2f}, temporal {time_:.2f}, Crank-Nicolson spatial {cn:.2f}"


def criterion_11():
    m1, m2 = MarketParams(0.05, 0.0, 0.20), MarketParams(0.07, 0.0, 0.45)
    g1 = single_cutoff("down", 180, 150, 0.25, m1, CutoffConfig(4.2))
    g2 = single_cutoff("down", 180, 150, 1.0, m2, CutoffConfig(4.4))
    gap1, gap2 = g1.x_m - g1.x_b, g2.x_m - g2.x_b
    c = BarrierContract(150, 0.25, g1.S_m + 1.0, BarrierGeometry.down_and_out(180))
    rep = price_continuous(c, m1, 100)
    van = vanilla_call(c.S0, 150, 0.25, 0.05, 0.0, 0.20)
    ok = (abs(gap1 - 0.4125) <= 1e-4 and abs(gap2 - 2.0112) <= 1e-4
          and rep.boundary_mode == SHORT_CIRCUIT and rep.pde_steps == 0 and rep.value == van)
    return ok, f"gaps {gap1:.5f}, {gap2:.5f}; short-circuit value {rep.value:.4f} with {rep.pde_steps} steps"


def criterion_12():
    t3 = run_table("T3", WORKERS)
    flags = [c for c in t3.cells if c.quantity == "flag"]
    ok = bool(flags) and all(c.passed for c in flags)
    return ok, f"HOBIS minimal mesh <= HABIS minimal mesh in {sum(c.passed for c in flags)}/{len(flags)} rows"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def _line(k, ok, detail):
    return f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"


@pytest.mark.parametrize("k", range(1, len(CRITERIA) + 1))
def test_criterion(k):
    ok, detail = CRITERIA[k - 1]()
    print(_line(k, ok, detail))
    assert ok, detail


def main() -> int:
    failed = 0
    for k, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        failed += not ok
        print(_line(k, ok, detail), flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
