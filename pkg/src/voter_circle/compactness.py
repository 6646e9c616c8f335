"""Compactness scores for districts and checks of the half-disk optimality constants.

Scores follow the usual redistricting conventions: Polsby-Popper is
``4 pi A / P^2`` (a disk scores 1), the hull ratio is ``A / area(hull)``,
and Reock is ``A`` over the area of the smallest enclosing disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .geometry import GeometryError, Polygon, clip_halfplane, smallest_enclosing_disk

HALF_DISK_PERIMETER = math.pi + 2
HALF_DISK_INERTIA_SUM = math.pi / 2 - 16 / (9 * math.pi)


@dataclass(frozen=True)
class CompactnessReport:
    area: float
    perimeter: float
    polsby_popper: float
    hull_ratio: float
    reock: float
    centroid: tuple[float, float]
    inertia: float

    def as_dict(self) -> dict:
        return {
            "area": self.area,
            "perimeter": self.perimeter,
            "polsby_popper": self.polsby_popper,
            "hull_ratio": self.hull_ratio,
            "reock": self.reock,
            "centroid": list(self.centroid),
            "inertia": self.inertia,
        }


def compactness_report(p: Polygon) -> CompactnessReport:
    area = p.area
    perimeter = p.perimeter
    disk = smallest_enclosing_disk(p.vertices)
    c = p.centroid
    return CompactnessReport(
        area=area,
        perimeter=perimeter,
        polsby_popper=4 * math.pi * area / perimeter**2,
        hull_ratio=min(1.0, area / p.hull_area()),
        reock=area / disk.area,
        centroid=(float(c[0]), float(c[1])),
        inertia=p.inertia,
    )


def dispersion_score(p: Polygon) -> float:
    """Inertia of a disk of equal area divided by the polygon's inertia (1 for a disk)."""
    return p.area**2 / (2 * math.pi * p.inertia)


# ------------------------------------------------------ boundary arc objective

def chord_objective(theta: float) -> float:
    """Longer boundary of a disk cut by the chord at half-angle ``theta``."""
    if not 0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    return max(2 * theta, 2 * math.pi - 2 * theta) + 2 * math.sin(theta)


# ------------------------------------------------ unit disk split at x = z

def _check_z(z: float, allow_empty: bool = False):
    lo_ok = z >= -1 if allow_empty else z > -1
    if not (lo_ok and z <= 1):
        raise ValueError(f"z must lie in (-1, 1], got {z}")


def split_mass(z: float) -> float:
    """Area of ``{x <= z}`` inside the unit disk."""
    _check_z(z, allow_empty=True)
    return z * math.sqrt(1 - z * z) + math.asin(z) + math.pi / 2


def split_centroid(z: float) -> float:
    """Abscissa of the centroid of ``{x <= z}`` inside the unit disk."""
    _check_z(z)
    return -(2.0 / 3.0) * (1 - z * z) ** 1.5 / split_mass(z)


def split_polar_moment(z: float) -> float:
    """``int (x^2 + y^2)`` over ``{x <= z}`` inside the unit disk, in closed form."""
    _check_z(z, allow_empty=True)
    s = math.sqrt(1 - z * z)
    return math.asin(z) / 2 + z * s * (1 + 2 * z * z) / 6 + math.pi / 4


def split_inertia_closed(z: float) -> float:
    """Inertia of ``{x <= z}`` about its centroid via the polar moment and parallel axes."""
    _check_z(z)
    xbar = split_centroid(z)
    return split_polar_moment(z) - split_mass(z) * xbar * xbar


def split_inertia(z: float, epsabs: float = 1e-11) -> float:
    """Inertia of ``{x <= z}`` about its centroid by adaptive 2-D quadrature."""
    _check_z(z)
    xbar = split_centroid(z)
    val, err = integrate.dblquad(
        lambda y, x: y * y + (x - xbar) ** 2,
        -1.0, z,
        lambda x: -math.sqrt(max(0.0, 1 - x * x)),
        lambda x: math.sqrt(max(0.0, 1 - x * x)),
        epsabs=epsabs, epsrel=1e-12,
    )
    return val


def inertia_pair(z: float) -> float:
    """``I(z) + I(-z)`` from the closed-form reduction."""
    return math.pi / 2 - split_mass(z) * split_centroid(z) ** 2 - split_mass(-z) * split_centroid(-z) ** 2


def inertia_pair_derivative(z: float) -> float:
    xa, xb = split_centroid(z), split_centroid(-z)
    return 2 * math.sqrt(1 - z * z) * (xa + xb) * (xa - xb - 2 * z)


@dataclass(frozen=True)
class InertiaCheck:
    z: float
    pair: float
    pair_quadrature: float
    derivative: float
    finite_difference: float
    xbar: float
    bound_ok: bool
    quadrature_ok: bool
    derivative_ok: bool
    bracket_ok: bool

    @property
    def ok(self) -> bool:
        return self.bound_ok and self.quadrature_ok and self.derivative_ok and self.bracket_ok


@dataclass(frozen=True)
class InertiaLemmaReport:
    checks: list[InertiaCheck] = field(repr=False)
    base: float

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[InertiaCheck]:
        return [c for c in self.checks if not c.ok]


def verify_inertia_lemma(grid, h: float = 1e-4, quad_tol: float = 1e-9) -> InertiaLemmaReport:
    """Check ``I(z) + I(-z) >= 2 I(0)`` and the derivative identity on a grid in (-1, 1)."""
    base = 2 * split_inertia(0.0)
    checks = []
    for z in grid:
        z = float(z)
        if not -1 < z < 1:
            raise ValueError(f"grid point {z} outside (-1, 1)")
        pair = inertia_pair(z)
        pair_q = split_inertia(z) + split_inertia(-z)
        deriv = inertia_pair_derivative(z)
        fd = (inertia_pair(z + h) - inertia_pair(z - h)) / (2 * h) if abs(z) + h < 1 else deriv
        xbar = split_centroid(z)
        checks.append(InertiaCheck(
            z=z,
            pair=pair,
            pair_quadrature=pair_q,
            derivative=deriv,
            finite_difference=fd,
            xbar=xbar,
            bound_ok=pair_q >= base - 1e-10,
            quadrature_ok=abs(pair_q - pair) <= 2 * quad_tol,
            derivative_ok=abs(deriv - fd) <= max(1e-6, 1e-4 * abs(deriv)),
            bracket_ok=(-0.5 <= xbar - z / 2 <= 0.5) and xbar >= (z - 1) / 2 - 1e-15 and xbar <= 1e-15,
        ))
    return InertiaLemmaReport(checks, base)


def centroid_gap_slopes(grid, h: float = 1e-4) -> np.ndarray:
    """Centered-difference slopes of ``xbar(z) - z``."""
    g = np.asarray(grid, dtype=float)
    f = np.vectorize(lambda z: split_centroid(z) - z)
    return (f(g + h) - f(g - h)) / (2 * h)


# ----------------------------------------------- one-dimensional mass centers

@dataclass(frozen=True)
class DominanceResult:
    case: str | None
    xbar: float
    midpoint: float
    holds: bool


def center_of_mass_dominance(xs, rho, a: float, b: float, tol: float = 1e-9) -> DominanceResult:
    """Compare the center of mass of a tabulated density with the interval midpoint.

    ``case`` is ``"a"`` when the right half dominates its mirror image,
    ``"b"`` when the left half does, ``"symmetric"`` when both hold and
    ``None`` when neither does; ``holds`` reports the matching inequality.
    """
    xs = np.asarray(xs, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    mass = integrate.trapezoid(rho, xs)
    if mass <= 0:
        raise ValueError("density has zero total mass")
    xbar = integrate.trapezoid(xs * rho, xs) / mass
    mid = (a + b) / 2
    t = np.linspace(0, (b - a) / 2, 2001)
    right = np.interp(mid + t, xs, rho)
    left = np.interp(mid - t, xs, rho)
    scale = max(1.0, float(np.max(np.abs(rho))))
    ge = bool(np.all(right >= left - tol * scale))
    le = bool(np.all(right <= left + tol * scale))
    if ge and le:
        return DominanceResult("symmetric", xbar, mid, abs(xbar - mid) <= 1e-6 * max(1.0, b - a))
    if ge:
        return DominanceResult("a", xbar, mid, xbar >= mid - tol)
    if le:
        return DominanceResult("b", xbar, mid, xbar <= mid + tol)
    return DominanceResult(None, xbar, mid, False)


# ----------------------------------------------------- polygonal disk splits

def disk_polygon(sides: int = 4096) -> Polygon:
    return Polygon.regular(sides)


def split_polygon(p: Polygon, normal, offset: float) -> tuple[Polygon, Polygon]:
    below = clip_halfplane(p.vertices, normal, offset, keep_below=True)
    above = clip_halfplane(p.vertices, normal, offset, keep_below=False)
    if len(below) < 3 or len(above) < 3:
        raise GeometryError("line does not split the polygon")
    return Polygon(below), Polygon(above)


@dataclass(frozen=True)
class DiskSplit:
    z: float
    perimeters: tuple[float, float]
    inertia_sum: float
    hull_ratios: tuple[float, float]

    @property
    def max_perimeter(self) -> float:
        return max(self.perimeters)


def disk_line_split(z: float, sides: int = 4096, disk: Polygon | None = None) -> DiskSplit:
    disk = disk or disk_polygon(sides)
    a, b = split_polygon(disk, (1.0, 0.0), z)
    return DiskSplit(
        z,
        (a.perimeter, b.perimeter),
        a.inertia + b.inertia,
        (a.area / a.hull_area(), b.area / b.hull_area()),
    )
