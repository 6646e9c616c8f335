"""Synthetic election data shipped with the package.

``competitive_stripes`` places wards on a jittered grid over the unit square.
Partisan lean alternates in vertical stripes and the statewide vote is close
to even, with the positive party narrowly ahead.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .geometry import Polygon
from .splitline import WeightedPoint, read_points_csv, read_polygon_json

STRIPES_POINTS = "competitive_stripes.csv"
STRIPES_POLYGON = "competitive_stripes_polygon.json"


def make_competitive_stripes(nx: int = 48, ny: int = 50, stripes: float = 3.0,
                             amplitude: float = 0.14, lean: float = 0.004,
                             seed: int = 20170620) -> tuple[list[WeightedPoint], Polygon]:
    rng = np.random.default_rng(seed)
    gx, gy = np.meshgrid((np.arange(nx) + 0.5) / nx, (np.arange(ny) + 0.5) / ny)
    x = gx.ravel() + rng.uniform(-0.3, 0.3, gx.size) / nx
    y = gy.ravel() + rng.uniform(-0.3, 0.3, gy.size) / ny
    pop = rng.integers(80, 121, x.size)
    share = 0.5 + lean + amplitude * np.sin(2 * np.pi * stripes * x) + rng.normal(0, 0.02, x.size)
    pos = np.rint(np.clip(share, 0.02, 0.98) * pop)
    neg = pop - pos
    points = [WeightedPoint(round(float(a), 6), round(float(b), 6), float(p), float(q))
              for a, b, p, q in zip(x, y, pos, neg)]
    square = Polygon(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    return points, square


def data_path(name: str):
    return resources.files("voter_circle") / "data" / name


def competitive_stripes() -> tuple[list[WeightedPoint], Polygon]:
    """Load the shipped fixture."""
    with resources.as_file(data_path(STRIPES_POINTS)) as pts, \
            resources.as_file(data_path(STRIPES_POLYGON)) as poly:
        return read_points_csv(pts), read_polygon_json(poly)
