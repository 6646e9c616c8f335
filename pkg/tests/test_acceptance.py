"""Acceptance criteria, one test and one printed PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary lines are
printed at the end of the session (and immediately with ``-s``).
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from voter_circle.compactness import (
    HALF_DISK_INERTIA_SUM,
    HALF_DISK_PERIMETER,
    chord_objective,
    compactness_report,
    disk_line_split,
    dispersion_score,
    verify_inertia_lemma,
)
from voter_circle.exact_analysis import prob_d2_exact, verify_ivt_characterization, walk_arrays
from voter_circle.fixtures import competitive_stripes
from voter_circle.geometry import Polygon
from voter_circle.limit_constants import (
    AVERAGE_SHARE,
    CLOSED_FORM,
    SUM_I,
    SUM_J,
    limit_d0,
    series_I,
    series_J,
)
from voter_circle.monte_carlo import estimate_distribution
from voter_circle.splitline import PointSet, partisan_splitline
from voter_circle.voter_model import VoteSequence, enumerate_d_distribution, optimal_gerrymander


def report(number: int, title: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# ------------------------------------------------------------------ 1

def test_criterion_1_exact_formula_equals_enumeration():
    t0 = time.perf_counter()
    mismatches = [n for n in range(1, 11) if prob_d2_exact(n) != enumerate_d_distribution(2, n)[2]]
    elapsed = time.perf_counter() - t0
    report(1, "exact Pr(D_n=2) equals enumeration for n <= 10",
           not mismatches and elapsed < 60,
           f"mismatches={mismatches} runtime={elapsed:.1f}s (limit 60s)")


# ------------------------------------------------------------------ 2

def test_criterion_2_inverse_sqrt_bracket():
    lo, hi = 1 / (2 * math.sqrt(2 * math.pi)), 2 / math.sqrt(math.pi)
    ns = np.unique(np.geomspace(100, 10_000, 20).round().astype(int))
    gaps = [math.sqrt(n) * float(Fraction(1, 2) - prob_d2_exact(int(n))) for n in ns]
    ok = len(ns) == 20 and all(lo <= g <= hi for g in gaps)
    report(2, "sqrt(n)(1/2 - Pr(D_n=2)) within [1/(2 sqrt(2 pi)), 2/sqrt(pi)]", ok,
           f"{len(ns)} points, range [{min(gaps):.5f}, {max(gaps):.5f}] vs [{lo:.5f}, {hi:.5f}]")


# ------------------------------------------------------------------ 3

def test_criterion_3_series_constants():
    t0 = time.perf_counter()
    sI = series_I(50)
    sJ = series_J(1_000_000)
    elapsed = time.perf_counter() - t0
    err_I = abs(sI.value - SUM_I)
    err_J = abs(sJ.value + sJ.tail_bound / 2 - SUM_J)
    ok = (err_I <= sI.tail_bound + 1e-8 and abs(sI.value + sI.tail_bound - SUM_I) <= 1e-8
          and abs(sJ.value - SUM_J) <= 1e-6 and err_J <= 1e-6
          and sI.max_term_discrepancy <= 1e-8 and sJ.max_term_discrepancy <= 1e-8
          and elapsed < 60)
    report(3, "sum I_k = pi/2 and sum J_k = (pi/2) tanh(pi/2); per-term quadrature", ok,
           f"|I-pi/2|={err_I:.2e} (tail {sI.tail_bound:.2e}), |J-target|={abs(sJ.value - SUM_J):.2e}, "
           f"term errors I {sI.max_term_discrepancy:.1e} J {sJ.max_term_discrepancy:.1e}, "
           f"runtime={elapsed:.1f}s")


# ------------------------------------------------------------------ 4

def test_criterion_4_three_routes():
    t0 = time.perf_counter()
    routes = limit_d0(strict=False)
    elapsed = time.perf_counter() - t0
    worst = max(routes.disagreements().values())
    ok = routes.agree and worst <= 1e-4 and elapsed < 300
    report(4, "closed form, series and quadrature agree within 1e-4", ok,
           f"closed={routes.closed:.12f} series={routes.series:.12f} quad={routes.quadrature:.12f} "
           f"max gap={worst:.1e}; resolved prefactor {routes.prefactor_name} "
           f"(ratio {routes.prefactor_ratio:.10f}); runtime={elapsed:.1f}s")


# ------------------------------------------------------------------ 5 and 6

@pytest.fixture(scope="module")
def large_run():
    t0 = time.perf_counter()
    est = estimate_distribution(2, 5000, 200_000, seed=20_170_620)
    return est, time.perf_counter() - t0


def test_criterion_5_monte_carlo_limit(large_run):
    est, elapsed = large_run
    exact = float(prob_d2_exact(5000))
    gap0 = abs(est.frequency(0) - CLOSED_FORM)
    z2 = abs(est.frequency(2) - exact) / est.std_errors[2]
    ok = gap0 <= 0.01 and z2 <= 10 and elapsed < 600
    report(5, "n=5000, 2e5 trials: Pr(D=0) near 1/(1+e^pi), Pr(D=2) near exact", ok,
           f"freq D0={est.frequency(0):.5f} (gap {gap0:.5f} <= 0.01), freq D2={est.frequency(2):.5f} "
           f"vs {exact:.5f} ({z2:.2f} SE <= 10), runtime={elapsed:.1f}s")


def test_criterion_6_average_share(large_run):
    est, _ = large_run
    share = est.mean_d / 2
    ok = abs(share - AVERAGE_SHARE) <= 0.01
    report(6, "E[D]/2 at n=5000 near 3/4 - 1/(2(1+e^pi))", ok,
           f"E[D]/2={share:.5f} vs {AVERAGE_SHARE:.5f} (gap {abs(share - AVERAGE_SHARE):.5f} <= 0.01)")


# ------------------------------------------------------------------ 7

def test_criterion_7_geometry_constants():
    half = disk_line_split(0.0, sides=4096)
    per_err = abs(half.max_perimeter - HALF_DISK_PERIMETER)
    inertia_err = abs(half.inertia_sum - HALF_DISK_INERTIA_SUM)
    grid = np.arange(1, 31416) * 1e-4
    argmin = float(grid[int(np.argmin([chord_objective(t) for t in grid]))])
    lemma = verify_inertia_lemma(np.linspace(-0.98, 0.98, 99))
    bound_ok = all(c.pair_quadrature >= lemma.base - 1e-10 for c in lemma.checks)
    deriv_ok = all(c.derivative_ok for c in lemma.checks)
    ok = (per_err <= 1e-3 and inertia_err <= 1e-3 and abs(argmin - math.pi / 2) <= 1e-4
          and bound_ok and deriv_ok and len(lemma.checks) == 99)
    report(7, "half-disk constants, chord minimum and the inertia lemma", ok,
           f"perimeter err={per_err:.1e}, inertia err={inertia_err:.1e}, chord argmin={argmin:.4f}, "
           f"lemma bound {'ok' if bound_ok else 'violated'}, derivative {'ok' if deriv_ok else 'off'} "
           f"on 99 points")


# ------------------------------------------------------------------ 8

def test_criterion_8_splitline_fixture():
    points, square = competitive_stripes()
    ps = PointSet(points)
    t0 = time.perf_counter()
    best = partisan_splitline(ps, square, 8, "maximize", "pos")
    worst = partisan_splitline(ps, square, 8, "minimize", "pos")
    again = partisan_splitline(PointSet(competitive_stripes()[0]), square, 8, "maximize", "pos")
    elapsed = time.perf_counter() - t0
    deterministic = np.array_equal(best.assignments, again.assignments) and best.lines == again.lines
    balance = max(best.max_deviation(), worst.max_deviation())
    ok = deterministic and balance <= 0.005 and best.majority_count > worst.majority_count
    report(8, "split-line fixture k=8: deterministic, balanced, maximize > minimize", ok,
           f"maximize={best.majority_count}/8, minimize={worst.majority_count}/8, "
           f"max deviation={balance:.4%}, deterministic={deterministic}, runtime={elapsed:.1f}s")


# ------------------------------------------------------------------ 9

def test_criterion_9_property_suites():
    rng = np.random.default_rng(9)
    failures = {"rotation/reflection": 0, "ivt": 0, "walk identity": 0, "similarity": 0}
    for _ in range(10_000):
        k = int(rng.integers(1, 7))
        n = int(rng.integers(1, 64 // k + 1))
        v = VoteSequence(rng.choice([-1, 1], k * n), k, n)
        d = optimal_gerrymander(v).d
        shift = int(rng.integers(k * n))
        if optimal_gerrymander(v.rotated(shift)).d != d or optimal_gerrymander(v.reversed()).d != d:
            failures["rotation/reflection"] += 1
    for _ in range(10_000):
        n = int(rng.integers(1, 33))
        p = rng.choice([0.5, 0.6, 0.7])
        v = VoteSequence(np.where(rng.random(2 * n) < p, 1, -1), 2, n)
        if not verify_ivt_characterization(v).holds:
            failures["ivt"] += 1
    for _ in range(10_000):
        n = int(rng.integers(1, 65))
        v = VoteSequence(rng.choice([-1, 1], 2 * n), 2, n)
        st = walk_arrays(v)
        if not st.identity_holds or st.walk_event != (optimal_gerrymander(v).d == 0):
            failures["walk identity"] += 1
    shapes = []
    for m in (4, 7, 12, 25):
        t = np.sort(rng.uniform(0, 2 * np.pi, m))
        r = rng.uniform(0.3, 1.0, m)
        shapes.append(Polygon(np.column_stack([r * np.cos(t), r * np.sin(t)])))
    base = [(compactness_report(s), dispersion_score(s)) for s in shapes]
    for i in range(1000):
        j = i % len(shapes)
        q = shapes[j].transformed(scale=float(rng.uniform(0.1, 10)), angle=float(rng.uniform(0, 2 * np.pi)),
                                  shift=rng.uniform(-50, 50, 2), reflect=bool(rng.integers(2)))
        r, ref = compactness_report(q), base[j][0]
        if (abs(r.polsby_popper - ref.polsby_popper) > 1e-9 or abs(r.hull_ratio - ref.hull_ratio) > 1e-9
                or abs(r.reock - ref.reock) > 1e-9 or abs(dispersion_score(q) - base[j][1]) > 1e-9):
            failures["similarity"] += 1
    ok = not any(failures.values())
    report(9, "property suites (3 x 1e4 cases, 1e3 similarity transforms)", ok,
           ", ".join(f"{k}: {v} failures" for k, v in failures.items()))
