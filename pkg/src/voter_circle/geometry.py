"""Planar polygons: exact moments, half-plane clipping and the smallest enclosing disk."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LinearRing
from shapely.geometry import Polygon as ShapelyPolygon


class GeometryError(ValueError):
    pass


def _shoelace_terms(v: np.ndarray):
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return x, y, xn, yn, x * yn - xn * y


def signed_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    return 0.5 * float(_shoelace_terms(v)[-1].sum())


@dataclass(frozen=True, eq=False)
class Polygon:
    """A simple polygon stored counterclockwise without a repeated closing vertex."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f"expected an (N, 2) array of vertices, got shape {v.shape}")
        if len(v) > 1 and np.allclose(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise GeometryError("a polygon needs at least 3 distinct vertices")
        if np.any(np.all(v == np.roll(v, -1, axis=0), axis=1)):
            raise GeometryError("polygon has repeated consecutive vertices")
        area = signed_area(v)
        if abs(area) <= 1e-300:
            raise GeometryError("polygon has zero area")
        if area < 0:
            v = v[::-1]
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vertices", v)

    @classmethod
    def checked(cls, vertices) -> "Polygon":
        """Build and additionally reject self-intersecting rings."""
        poly = cls(vertices)
        if not LinearRing(poly.vertices).is_simple:
            raise GeometryError("polygon boundary intersects itself")
        return poly

    @classmethod
    def regular(cls, sides: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0):
        t = phase + 2 * np.pi * np.arange(sides) / sides
        return cls(np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)]))

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def perimeter(self) -> float:
        d = np.roll(self.vertices, -1, axis=0) - self.vertices
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    @property
    def centroid(self) -> np.ndarray:
        origin = self.vertices[0]
        x, y, xn, yn, cross = _shoelace_terms(self.vertices - origin)
        a = 0.5 * cross.sum()
        cx = ((x + xn) * cross).sum() / (6 * a)
        cy = ((y + yn) * cross).sum() / (6 * a)
        return origin + np.array([cx, cy])

    def second_moment_about(self, q) -> float:
        """``int_P ||p - q||^2 dp`` from Green's theorem on the edges."""
        x, y, xn, yn, cross = _shoelace_terms(self.vertices - np.asarray(q, dtype=float))
        return float((cross * (x * x + x * xn + xn * xn + y * y + y * yn + yn * yn)).sum() / 12)

    @property
    def inertia(self) -> float:
        """Second moment about the centroid."""
        return self.second_moment_about(self.centroid)

    def hull_area(self) -> float:
        return float(ShapelyPolygon(self.vertices).convex_hull.area)

    def contains(self, pts, tol: float = 1e-9) -> np.ndarray:
        """Even-odd point membership, with points within ``tol`` of an edge counted inside."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        px, py = pts[:, 0:1], pts[:, 1:2]
        crosses = ((v[:, 1] > py) != (w[:, 1] > py))
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = v[:, 0] + (py - v[:, 1]) * (w[:, 0] - v[:, 0]) / (w[:, 1] - v[:, 1])
        inside = (np.count_nonzero(crosses & (px < xint), axis=1) % 2) == 1
        return inside | (edge_distance(pts, v) <= tol)

    def transformed(self, scale: float = 1.0, angle: float = 0.0, shift=(0.0, 0.0),
                    reflect: bool = False) -> "Polygon":
        c, s = math.cos(angle), math.sin(angle)
        v = self.vertices * np.array([1.0, -1.0 if reflect else 1.0])
        v = scale * v @ np.array([[c, s], [-s, c]]) + np.asarray(shift, dtype=float)
        return Polygon(v)


def edge_distance(pts: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest polygon edge."""
    v = vertices
    w = np.roll(v, -1, axis=0)
    d = w - v
    rel = pts[:, None, :] - v[None, :, :]
    t = np.clip((rel * d).sum(-1) / (d * d).sum(-1), 0.0, 1.0)
    nearest = v[None] + t[..., None] * d[None]
    return np.hypot(*(pts[:, None, :] - nearest).transpose(2, 0, 1)).min(axis=1)


def clip_halfplane(vertices: np.ndarray, normal, offset: float, keep_below: bool = True):
    """Sutherland-Hodgman clip of a ring to ``normal . p <= offset`` (or ``>=``).

    Returns the clipped vertex array, possibly with fewer than 3 vertices when
    nothing is left.
    """
    v = np.asarray(vertices, dtype=float)
    if len(v) == 0:
        return v
    nrm = np.asarray(normal, dtype=float)
    side = v @ nrm - offset
    if not keep_below:
        side = -side
    out = []
    for i in range(len(v)):
        p, q = v[i], v[(i + 1) % len(v)]
        sp, sq = side[i], side[(i + 1) % len(v)]
        if sp <= 0:
            out.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    if not out:
        return np.empty((0, 2))
    out = np.array(out)
    keep = np.ones(len(out), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(out, axis=0)) > 1e-15, axis=1)
    if len(out) > 1 and np.all(np.abs(out[0] - out[-1]) <= 1e-15):
        keep[-1] = False
    return out[keep]


def line_segment_in(vertices: np.ndarray, normal, offset: float):
    """Endpoints of the line ``normal . p = offset`` inside a convex ring, or None."""
    nrm = np.asarray(normal, dtype=float)
    v = np.asarray(vertices, dtype=float)
    side = v @ nrm - offset
    pts = []
    for i in range(len(v)):
        j = (i + 1) % len(v)
        if side[i] == 0:
            pts.append(v[i])
        elif side[i] * side[j] < 0:
            t = side[i] / (side[i] - side[j])
            pts.append(v[i] + t * (v[j] - v[i]))
    if len(pts) < 2:
        return None
    pts = np.array(pts)
    direction = np.array([-nrm[1], nrm[0]])
    proj = pts @ direction
    return pts[np.argmin(proj)], pts[np.argmax(proj)]


# ------------------------------------------------------ smallest enclosing disk

@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float
    support: tuple = ()

    @property
    def area(self) -> float:
        return math.pi * self.r * self.r

    def contains(self, p, slack: float = 1e-12) -> bool:
        return math.hypot(p[0] - self.cx, p[1] - self.cy) <= self.r * (1 + slack) + slack


def _disk_two(a, b) -> Disk:
    cx, cy = (a[0] + b[0]) / 2, (a[1] + b[1]) / 2
    return Disk(cx, cy, math.hypot(a[0] - cx, a[1] - cy), (a, b))


def _disk_three(a, b, c) -> Disk | None:
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r = max(math.hypot(x - p[0], y - p[1]) for p in (a, b, c))
    return Disk(x, y, r, (a, b, c))


def _disk_with_two(points, p, q) -> Disk:
    circ = _disk_two(p, q)
    left = right = None
    px, py, qx, qy = p[0], p[1], q[0], q[1]

    def cross(ax, ay, bx, by, cx, cy):
        return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)

    for r in points:
        if circ.contains(r):
            continue
        c = cross(px, py, qx, qy, r[0], r[1])
        d = _disk_three(p, q, r)
        if d is None:
            continue
        side = cross(px, py, qx, qy, d.cx, d.cy)
        if c > 0 and (left is None or side > cross(px, py, qx, qy, left.cx, left.cy)):
            left = d
        elif c < 0 and (right is None or side < cross(px, py, qx, qy, right.cx, right.cy)):
            right = d
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left.r <= right.r else right


def _disk_with_one(points, p) -> Disk:
    c = Disk(p[0], p[1], 0.0, (p,))
    for i, q in enumerate(points):
        if not c.contains(q):
            c = _disk_two(p, q) if c.r == 0 else _disk_with_two(points[: i + 1], p, q)
    return c


def smallest_enclosing_disk(points, seed: int = 0) -> Disk:
    """Randomized incremental minimum enclosing disk (expected linear time).

    ``seed`` fixes the insertion order, so the result is deterministic.
    """
    pts = [tuple(map(float, p)) for p in np.asarray(points, dtype=float)]
    if not pts:
        raise GeometryError("no points")
    random.Random(seed).shuffle(pts)
    c = None
    for i, p in enumerate(pts):
        if c is None or not c.contains(p):
            c = _disk_with_one(pts[: i + 1], p)
    support = tuple(s for s in c.support if abs(math.hypot(s[0] - c.cx, s[1] - c.cy) - c.r) <= 1e-9 * max(1.0, c.r))
    return Disk(c.cx, c.cy, c.r, support)
