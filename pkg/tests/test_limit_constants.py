import math

import numpy as np
import pytest
from scipy import integrate, stats

from voter_circle import limit_constants as lc
from voter_circle.limit_constants import (
    AVERAGE_SHARE,
    CLOSED_FORM,
    SUM_I,
    SUM_J,
    RouteDisagreement,
    closed_form_identity_gap,
    cone_angle,
    i_exponent,
    i_term,
    j_exponent,
    j_term,
    limit_d0,
    limit_quadrature,
    quarter_plane_integral,
    series_I,
    series_J,
    trivariate_density,
    trivariate_f,
)

PHI0 = 1 / math.sqrt(2 * math.pi)


# ------------------------------------------------------ trivariate density

def test_density_degenerate_wedge_is_zero():
    for x in (-1.0, 0.0, 0.3):
        assert trivariate_f(0.0, 0.0, x).value == 0.0
    assert trivariate_f(0.5, 1.0, 0.0).value == 0.0
    assert trivariate_f(-1.0, -0.5, 0.0).value == 0.0


def test_density_wide_bounds_is_standard_normal():
    r = trivariate_f(-5.0, 5.0, 0.0, K=10)
    assert r.value == pytest.approx(PHI0, abs=1e-6)
    xs = np.linspace(-4, 4, 81)
    assert np.allclose(trivariate_density(-12.0, 12.0, xs), stats.norm.pdf(xs), atol=1e-12)


def test_density_integrates_to_minimum_law():
    # with no upper barrier in reach, Pr(L >= a) = 1 - 2 Phi(a)
    for a in (-0.3, -1.0, -2.0):
        val, _ = integrate.quad(lambda x: float(trivariate_density(a, 14.0, x)), a, 14.0, limit=200)
        assert val == pytest.approx(1 - 2 * stats.norm.cdf(a), abs=1e-9)


def test_density_nonnegative_on_grid():
    rng = np.random.default_rng(0)
    a = -rng.random(20_000) * 4
    b = rng.random(20_000) * 4
    x = a + (b - a) * rng.random(20_000)
    assert trivariate_density(a, b, x).min() >= -1e-12


def test_density_tail_bound_covers_truncation():
    for a, b, x in [(-0.4, 0.3, 0.1), (-1.0, 1.0, 0.5), (-0.2, 0.2, -0.1)]:
        coarse = trivariate_f(a, b, x, K=3)
        fine = trivariate_f(a, b, x, K=400)
        assert abs(coarse.value - fine.value) <= coarse.tail_bound + 1e-15
        assert coarse.tail_bound >= 0


def test_density_rejects_bad_truncation():
    with pytest.raises(ValueError):
        trivariate_density(-1.0, 1.0, 0.0, K=0)


def test_strip_probability_matches_walk_simulation():
    # Pr(-1 <= L <= U <= 1) for Brownian motion against a +-1 walk of n = 400
    # steps; a lattice walk kept within +-(sqrt(n) - 1) never touches +-sqrt(n)
    p, _ = integrate.quad(lambda x: float(trivariate_density(-1.0, 1.0, x)), -1.0, 1.0,
                          epsabs=1e-12)
    n, trials, barrier = 400, 200_000, 19
    rng = np.random.default_rng(2024)
    hits = 0
    for _ in range(trials // 10_000):
        steps = rng.choice(np.array([-1, 1], dtype=np.int16), size=(10_000, n))
        walk = np.cumsum(steps, axis=1, dtype=np.int16)
        hits += int(np.count_nonzero(np.abs(walk).max(axis=1) <= barrier))
    freq = hits / trials
    se = math.sqrt(p * (1 - p) / trials)
    assert abs(freq - p) <= 3 * se


# ---------------------------------------------------------- I_k and J_k

def test_i_zero_is_quarter_pi():
    assert i_term(0) == pytest.approx(math.pi / 4, abs=1e-15)
    assert quarter_plane_integral(i_exponent(0)) == pytest.approx(math.pi / 4, abs=1e-10)


def test_cone_angle_matches_ray_geometry():
    for k in range(-6, 7):
        u, v = np.array([k - 1, k], float), np.array([k, k + 1], float)
        angle = math.acos(u @ v / (np.linalg.norm(u) * np.linalg.norm(v))) if k else math.pi / 2
        assert cone_angle(k) == pytest.approx(angle, abs=1e-12)


def test_series_i():
    r = series_I(50)
    assert r.max_term_discrepancy < 1e-8
    assert set(r.quadrature_terms) == set(range(-10, 11))
    assert abs(r.value - SUM_I) <= r.tail_bound + 1e-8
    # the tail telescopes exactly
    assert r.value + r.tail_bound == pytest.approx(SUM_I, abs=1e-13)


def test_series_i_partial_sums_monotone():
    rs = [series_I(K, quad_K=0) for K in (1, 2, 5, 10, 50, 200)]
    vals = [r.value for r in rs]
    tails = [r.tail_bound for r in rs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v < SUM_I for v in vals)
    assert all(b < a for a, b in zip(tails, tails[1:]))


def test_j_terms():
    assert j_term(0) == 0.5
    assert j_term(-1) == 0.5
    assert j_term(1) == pytest.approx(0.1)
    assert quarter_plane_integral(j_exponent(0)) == pytest.approx(0.5, abs=1e-8)
    for k in range(-10, 11):
        assert j_term(k) == j_term(-1 - k)


def test_j_term_matches_quadrature():
    # quadrature, not the displayed term formula, is the oracle here
    for k in (-3, -2, -1, 1, 2, 3):
        assert quarter_plane_integral(j_exponent(k)) == pytest.approx(j_term(k), abs=1e-8)
        assert abs(quarter_plane_integral(j_exponent(k)) - 1 / (4 * k * k + 2 * k + 2)) > 1e-3


def test_series_j():
    r = series_J()
    assert r.max_term_discrepancy < 1e-8
    assert abs(r.value - SUM_J) <= 1e-6
    assert r.value < SUM_J <= r.value + r.tail_bound


def test_series_j_partial_sums_monotone():
    vals = [series_J(K, quad_K=0).value for K in (1, 3, 10, 100, 1000)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert all(v < SUM_J for v in vals)


def test_series_reject_bad_k():
    with pytest.raises(ValueError):
        series_I(0)
    with pytest.raises(ValueError):
        series_J(0)


# ---------------------------------------------------------- the limit

def test_closed_form_values():
    assert CLOSED_FORM == pytest.approx(0.041423832166, abs=1e-12)
    assert closed_form_identity_gap() < 1e-16
    assert AVERAGE_SHARE == pytest.approx(0.7292880839, abs=1e-10)
    assert SUM_J == pytest.approx(1.44065952, abs=1e-8)


def test_three_routes_agree():
    routes = limit_d0()
    assert routes.agree
    assert max(routes.disagreements().values()) <= 1e-4
    assert routes.prefactor_name == "1/pi"
    assert routes.prefactor_ratio == pytest.approx(1 / math.pi, rel=1e-6)
    assert routes.quad.min_density >= -1e-12


def test_half_prefactor_would_give_half_the_limit():
    half = (SUM_I - SUM_J) / (2 * math.pi)
    assert half == pytest.approx(CLOSED_FORM / 2, rel=1e-12)


def test_quadrature_stable_under_refinement():
    base = limit_quadrature()
    finer = limit_quadrature(K=2 * base.K, start_panels=16)
    assert abs(base.value - finer.value) <= 1e-5
    assert finer.nodes > base.nodes


def test_route_disagreement_is_reported(monkeypatch):
    monkeypatch.setattr(lc, "CLOSED_FORM", 0.05)
    with pytest.raises(RouteDisagreement, match="closed-series"):
        limit_d0(K_series=1000)
    routes = limit_d0(K_series=1000, strict=False)
    assert not routes.agree
