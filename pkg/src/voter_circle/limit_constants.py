"""The limit of ``Pr(D_n = 0)`` computed three independent ways.

The limiting probability is a Gaussian integral of the joint density of the
running minimum ``L``, running maximum ``U`` and endpoint ``X`` of standard
Brownian motion on ``[0, 1]``::

    f(a, b, x) = (2 pi)^(-1/2) sum_k [exp(-(x - 2k(b-a))^2 / 2)
                                     - exp(-(x - 2b - 2k(b-a))^2 / 2)]

for ``a <= 0 <= b`` and zero elsewhere. Splitting the integral of the series
term by term gives two families of quarter-plane Gaussian integrals,
``I_k`` and ``J_k``, whose sums have closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

SQRT_2PI = math.sqrt(2 * math.pi)
CLOSED_FORM = 1.0 / (1.0 + math.exp(math.pi))
AVERAGE_SHARE = 0.75 - 0.5 * CLOSED_FORM
SUM_I = math.pi / 2
SUM_J = (math.pi / 2) * math.tanh(math.pi / 2)

# Box for the direct quadrature; the Gaussian factor exp(-(a-b)^2/2) and the
# endpoint density make the mass outside it far below 1e-13.
BOX = 8.0
# Below this range b - a the density is dropped: Pr(U - L < 0.1) is at most
# Pr(|N| < 1)^100 < 1e-16 (100 independent increments of variance 1/100).
MIN_RANGE = 0.1


class QuadratureError(RuntimeError):
    pass


class RouteDisagreement(RuntimeError):
    pass


@dataclass(frozen=True)
class SeriesResult:
    value: float
    truncation_K: int
    tail_bound: float
    quadrature_terms: dict = field(default_factory=dict, repr=False)
    max_term_discrepancy: float = 0.0

    @property
    def bracket(self) -> tuple[float, float]:
        return self.value, self.value + self.tail_bound


def trivariate_density(a, b, x, K: int = 50) -> np.ndarray:
    """Vectorized ``f(a, b, x)`` truncated to ``|k| <= K``."""
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    a, b, x = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (a, b, x)))
    w = b - a
    inside = (a <= 0) & (b >= 0) & (w > 0)
    ks = np.arange(-K, K + 1, dtype=float)
    shift = 2.0 * ks * w[..., None]
    xe = x[..., None]
    terms = np.exp(-0.5 * (xe - shift) ** 2) - np.exp(-0.5 * (xe - 2.0 * b[..., None] - shift) ** 2)
    return np.where(inside, terms.sum(axis=-1) / SQRT_2PI, 0.0)


def trivariate_tail_bound(a: float, b: float, x: float, K: int) -> float:
    """Bound on the absolute sum of the omitted ``|k| > K`` terms.

    Each omitted term is below ``exp(-u^2/2)`` with ``u = 2|k|(b-a) - |x| - 2|b|``,
    and consecutive bounds shrink by at least ``exp(-2 (b-a)^2)``.
    """
    w = b - a
    if not (a <= 0 <= b) or w <= 0:
        return 0.0
    u0 = 2 * (K + 1) * w - abs(x) - 2 * abs(b)
    if u0 <= 0:
        return math.inf
    return 2.0 * math.exp(-0.5 * u0 * u0) / (SQRT_2PI * -math.expm1(-2 * w * w))


def trivariate_f(a: float, b: float, x: float, K: int = 50) -> SeriesResult:
    value = float(trivariate_density(a, b, x, K))
    return SeriesResult(value, K, trivariate_tail_bound(a, b, x, K))


def truncation_for(w_min: float, reach: float, tol_exponent: float = 9.0) -> int:
    """Smallest K whose tail bound is below ``exp(-tol_exponent^2/2)`` for ranges >= w_min."""
    return int(math.ceil((reach + tol_exponent) / (2 * w_min)))


# ---------------------------------------------------------------- I_k and J_k

def i_exponent(k: int):
    return lambda a, b: 0.5 * ((a + b - 2 * k * (b - a)) ** 2 + (a - b) ** 2)


def j_exponent(k: int):
    return lambda a, b: 0.5 * ((a - b - 2 * k * (b - a)) ** 2 + (a - b) ** 2)


def quarter_plane_integral(exponent, epsabs: float = 1e-13, epsrel: float = 1e-12) -> float:
    """``int_{b>=0} int_{a<=0} exp(-Q(a, b)) da db`` for a positive quadratic form ``Q``.

    Done as a 2-D adaptive integral in polar coordinates ``a = -r cos t``,
    ``b = r sin t`` over ``t in [0, pi/2]``, ``r >= 0``.
    """

    def inner(t):
        q = exponent(-math.cos(t), math.sin(t))
        val, _ = integrate.quad(lambda r: math.exp(-q * r * r) * r, 0, math.inf,
                                epsabs=epsabs, epsrel=epsrel)
        return val

    # The peak of 1/Q sits where the quadratic form is smallest; help quad find it.
    ts = np.linspace(0, math.pi / 2, 2001)
    qs = np.array([exponent(-math.cos(t), math.sin(t)) for t in ts])
    peak = float(ts[np.argmin(qs)])
    pts = [p for p in (peak,) if 0 < p < math.pi / 2]
    val, err = integrate.quad(inner, 0, math.pi / 2, points=pts or None, limit=400,
                              epsabs=epsabs, epsrel=epsrel)
    if not np.isfinite(val) or err > 1e-9:
        raise QuadratureError(f"quadrature error estimate {err:.3g} too large")
    return val


def cone_angle(k: int) -> float:
    """Angle between the rays through ``(k-1, k)`` and ``(k, k+1)``."""
    return math.atan2(1.0, 2.0 * k * k)


def i_term(k: int) -> float:
    return 0.5 * cone_angle(k)


def j_term(k: int) -> float:
    # exponent is (2k^2 + 2k + 1)(b - a)^2, so the integral is 1/(2(2k^2 + 2k + 1))
    return 1.0 / (4 * k * k + 4 * k + 2)


def series_I(K: int = 50, quad_K: int = 10) -> SeriesResult:
    """Partial sum of ``I_k`` over ``|k| <= K``.

    Terms use the cone-angle form. The omitted terms telescope:
    ``atan(1/(2k^2)) = atan(1/(2k-1)) - atan(1/(2k+1))``, so the two tails
    add up to exactly ``atan(1/(2K+1))``. Terms with ``|k| <= quad_K`` are
    also integrated directly and the largest discrepancy is recorded.
    """
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    ks = np.arange(1, K + 1, dtype=float)
    value = math.pi / 4 + math.fsum(np.arctan2(1.0, 2.0 * ks * ks))
    tail = math.atan(1.0 / (2 * K + 1))
    quad = {k: quarter_plane_integral(i_exponent(k)) for k in range(-quad_K, quad_K + 1)}
    disc = max((abs(q - i_term(k)) for k, q in quad.items()), default=0.0)
    return SeriesResult(value, K, tail, quad, disc)


def series_J(K: int = 1_000_000, quad_K: int = 10) -> SeriesResult:
    """Partial sum of ``J_k = 1/(4k^2 + 4k + 2)`` over ``|k| <= K``.

    Tail bound: for ``m = |k| > K`` each omitted term is at most
    ``1/(4m(m-1))``, and those telescope to ``1/(4K)`` per side.
    """
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}")
    ks = np.arange(-K, K + 1, dtype=float)
    terms = 1.0 / (4 * ks * ks + 4 * ks + 2)
    value = math.fsum(np.sort(terms))
    tail = 1.0 / (2 * K)
    quad = {k: quarter_plane_integral(j_exponent(k)) for k in range(-quad_K, quad_K + 1)}
    disc = max((abs(q - j_term(k)) for k, q in quad.items()), default=0.0)
    return SeriesResult(value, K, tail, quad, disc)


# ---------------------------------------------------------- direct quadrature

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    nodes: int
    K: int
    min_density: float


def limit_integrand(a, b, K: int) -> np.ndarray:
    """``2 f(a, b, a+b) phi(a-b)`` with ranges below MIN_RANGE dropped."""
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    f = trivariate_density(a, b, a + b, K)
    f = np.where(b - a < MIN_RANGE, 0.0, f)
    return 2.0 * f * np.exp(-0.5 * (a - b) ** 2) / SQRT_2PI, f


def _panel_rule(lo: float, hi: float, panels: int, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _tensor_quadrature(panels: int, order: int, K: int, box: float, chunk: int = 64):
    a, wa = _panel_rule(-box, 0.0, panels, order)
    b, wb = _panel_rule(0.0, box, panels, order)
    total = 0.0
    fmin = math.inf
    for i in range(0, a.size, chunk):
        g, f = limit_integrand(a[i : i + chunk, None], b[None, :], K)
        total += float(wa[i : i + chunk] @ g @ wb)
        fmin = min(fmin, float(f.min()))
    return total, a.size * b.size, fmin


def limit_quadrature(K: int | None = None, tol: float = 1e-7, order: int = 12,
                     start_panels: int = 8, max_panels: int = 128,
                     box: float = BOX) -> QuadratureResult:
    """Direct 2-D integral of the density over the wedge, refined by panel doubling."""
    K_needed = truncation_for(MIN_RANGE, 3 * box)
    K = max(K or 0, K_needed)
    panels = start_panels
    prev, nodes, fmin = _tensor_quadrature(panels, order, K, box)
    while True:
        panels *= 2
        cur, nodes, fmin2 = _tensor_quadrature(panels, order, K, box)
        fmin = min(fmin, fmin2)
        err = abs(cur - prev)
        if err < tol:
            return QuadratureResult(cur, err, nodes, K, fmin)
        if panels >= max_panels:
            raise QuadratureError(f"no convergence: last change {err:.3g} at {panels} panels")
        prev = cur


# -------------------------------------------------------------- three routes

PREFACTORS = {"1/(2*pi)": 1 / (2 * math.pi), "1/pi": 1 / math.pi}


@dataclass(frozen=True)
class LimitRoutes:
    closed: float
    series: float
    quadrature: float
    prefactor_name: str
    prefactor_ratio: float
    series_I: SeriesResult
    series_J: SeriesResult
    quad: QuadratureResult
    tol: float

    def disagreements(self) -> dict[str, float]:
        return {
            "closed-series": abs(self.closed - self.series),
            "closed-quadrature": abs(self.closed - self.quadrature),
            "series-quadrature": abs(self.series - self.quadrature),
        }

    @property
    def agree(self) -> bool:
        return max(self.disagreements().values()) <= self.tol


def closed_form_identity_gap() -> float:
    """``|(1 - tanh(pi/2))/2 - 1/(1+e^pi)|``, zero up to rounding."""
    return abs(0.5 * (1 - math.tanh(math.pi / 2)) - CLOSED_FORM)


def resolve_prefactor(series_difference: float, quadrature_value: float) -> tuple[str, float]:
    """Pick the candidate constant closest to ``quadrature / (sum I - sum J)``."""
    ratio = quadrature_value / series_difference
    name = min(PREFACTORS, key=lambda k: abs(math.log(PREFACTORS[k] / ratio)))
    return name, ratio


def limit_d0(K_series: int = 1_000_000, K_density: int = 50, tol: float = 1e-4,
             quad_tol: float = 1e-7, quad_K: int = 10, strict: bool = True) -> LimitRoutes:
    sI = series_I(K_series, quad_K=quad_K)
    sJ = series_J(K_series, quad_K=quad_K)
    quad = limit_quadrature(K_density, tol=quad_tol)
    diff = sI.value - sJ.value
    name, ratio = resolve_prefactor(diff, quad.value)
    routes = LimitRoutes(CLOSED_FORM, PREFACTORS[name] * diff, quad.value, name, ratio,
                         sI, sJ, quad, tol)
    if strict and not routes.agree:
        report = ", ".join(f"{k}={v:.3g}" for k, v in routes.disagreements().items())
        raise RouteDisagreement(f"routes disagree beyond {tol}: {report}")
    return routes
