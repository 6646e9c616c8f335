"""Recursive split-line districting with a partisan objective.

A region holding ``k`` districts is cut by a straight line into parts holding
``ceil(k/2)`` and ``floor(k/2)`` districts, with populations in that ratio.
Candidate lines come from ``angles`` evenly spaced directions; along each
direction the cut sits at the weighted quantile, halfway between the two
projected points on either side of it. Points sharing the cut's projection
are ordered by index, which puts the lower-index points on the lower side.

The choice among candidate lines is a beam search: every candidate is scored
by a greedy rollout down to single districts, the ``beam`` best are searched
recursively, and the plan with the best final count wins. This is a
heuristic, so the counts it reports are lower bounds on what an exhaustive
search over line sequences could achieve.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .compactness import CompactnessReport, compactness_report
from .geometry import GeometryError, Polygon, clip_halfplane, line_segment_in


class InfeasibleSplit(ValueError):
    pass


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedPoint:
    x: float
    y: float
    pos_weight: float
    neg_weight: float

    def __post_init__(self):
        if self.pos_weight < 0 or self.neg_weight < 0:
            raise ValueError("vote weights must be nonnegative")
        if self.pos_weight + self.neg_weight <= 0:
            raise ValueError("a point needs positive total weight")

    @property
    def population(self) -> float:
        return self.pos_weight + self.neg_weight


class PointSet:
    """Columnar view of weighted points with per-direction projections."""

    def __init__(self, points):
        pts = list(points)
        if not pts:
            raise InputError("no points")
        self.xy = np.array([[p.x, p.y] for p in pts], dtype=float)
        self.pos = np.array([p.pos_weight for p in pts], dtype=float)
        self.neg = np.array([p.neg_weight for p in pts], dtype=float)
        self.pop = self.pos + self.neg
        self._angles = None

    def __len__(self) -> int:
        return len(self.pop)

    def directions(self, angles: int):
        if self._angles is None or self._angles[0] != angles:
            theta = np.pi * np.arange(angles) / angles
            normals = np.column_stack([np.cos(theta), np.sin(theta)])
            self._angles = (angles, theta, normals, self.xy @ normals.T)
        return self._angles[1:]


@dataclass(frozen=True)
class Cut:
    direction: int
    angle: float
    offset: float
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    lower_pop: float
    upper_pop: float
    lower_districts: int
    upper_districts: int

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])


def split_counts(k: int) -> tuple[int, int]:
    return (k + 1) // 2, k // 2


def depth(k: int) -> int:
    return max(1, math.ceil(math.log2(k))) if k > 1 else 1


def split_tolerance(tolerance: float, k: int) -> float:
    """Per-split relative tolerance so that compounded errors stay within ``tolerance``."""
    return (1 + tolerance) ** (1 / depth(k)) - 1


class _Node:
    __slots__ = ("idx", "order", "k", "path")

    def __init__(self, idx, order, k, path):
        self.idx, self.order, self.k, self.path = idx, order, k, path

    def key(self, tag: str):
        return tag, self.k, self.idx.size, hash(self.idx.tobytes())


@dataclass
class _Candidates:
    direction: np.ndarray
    pos_index: np.ndarray
    lower_k: np.ndarray
    upper_k: np.ndarray
    lower_pop: np.ndarray
    upper_pop: np.ndarray
    lower_pos: np.ndarray
    lower_neg: np.ndarray
    upper_pos: np.ndarray
    upper_neg: np.ndarray
    offset: np.ndarray

    def __len__(self):
        return len(self.direction)


class _Engine:
    def __init__(self, ps: PointSet, angles: int, tolerance: float, party: str, sign: int):
        self.ps = ps
        self.angles = angles
        self.theta, self.normals, self.proj = ps.directions(angles)
        self.tol = tolerance
        self.party = party
        self.sign = sign
        self.memo = {}

    def root(self, k: int) -> _Node:
        idx = np.arange(len(self.ps))
        order = np.argsort(self.proj.T, axis=1, kind="stable").astype(np.int32)
        return _Node(idx, order, k, "")

    def party_wins(self, pos, neg):
        return pos > neg if self.party == "pos" else neg > pos

    def candidates(self, node: _Node, ratios=None) -> _Candidates:
        ps = self.ps
        order = node.order
        pop = ps.pop[node.idx][order]
        cpop = np.cumsum(pop, axis=1)
        cpos = np.cumsum(ps.pos[node.idx][order], axis=1)
        total = float(cpop[0, -1])
        if ratios is None:
            lo_k, hi_k = split_counts(node.k)
            ratios = [(lo_k, hi_k)] if lo_k == hi_k else [(lo_k, hi_k), (hi_k, lo_k)]
        out = []
        rows = np.arange(order.shape[0])
        for m_lo, m_hi in ratios:
            target = total * m_lo / (m_lo + m_hi)
            allowed = self.tol * min(target, total - target)
            # cut positions 0..n-2 keep both sides nonempty
            j = np.argmin(np.abs(cpop[:, :-1] - target), axis=1)
            lpop = cpop[rows, j]
            ok = np.abs(lpop - target) <= allowed * (1 + 1e-12)
            lpos = cpos[rows, j]
            lneg = lpop - lpos
            below = node.idx[order[rows, j]]
            above = node.idx[order[rows, j + 1]]
            offset = 0.5 * (self.proj[below, rows] + self.proj[above, rows])
            tpos = cpos[0, -1]
            sel = np.nonzero(ok)[0]
            out.append(_Candidates(
                sel, j[sel], np.full(sel.size, m_lo), np.full(sel.size, m_hi),
                lpop[sel], total - lpop[sel], lpos[sel], lneg[sel],
                tpos - lpos[sel], (total - tpos) - lneg[sel], offset[sel],
            ))
        cands = _Candidates(*(np.concatenate([getattr(c, f) for c in out])
                              for f in _Candidates.__dataclass_fields__))
        order_c = np.lexsort((np.arange(len(cands)), cands.direction))
        return _Candidates(*(getattr(cands, f)[order_c] for f in _Candidates.__dataclass_fields__))

    def children(self, node: _Node, cands: _Candidates, c: int) -> tuple[_Node, _Node]:
        d = int(cands.direction[c])
        j = int(cands.pos_index[c])
        row = node.order[d]
        n = node.idx.size
        lower_local = np.zeros(n, dtype=bool)
        lower_local[row[: j + 1]] = True
        kids = []
        for mask, k, tag in ((lower_local, int(cands.lower_k[c]), "L"),
                             (~lower_local, int(cands.upper_k[c]), "U")):
            child_order = None
            if k > 1:
                # renumber kept points, drop the rest, keep each row's sort order
                newidx = np.cumsum(mask, dtype=np.int32) - 1
                flat = node.order.ravel()
                kept = flat[np.flatnonzero(mask[flat])]
                child_order = newidx[kept].reshape(node.order.shape[0], -1)
            kids.append(_Node(node.idx[mask], child_order, k, node.path + tag))
        return kids[0], kids[1]

    # proxy used by the greedy rollout: districts in party-won children, then margins
    def proxy(self, cands: _Candidates) -> np.ndarray:
        def part(pos, neg, k):
            win = self.party_wins(pos, neg)
            margin = (pos - neg) / (pos + neg)
            if self.party == "neg":
                margin = -margin
            return k * win, k * np.clip(margin / 0.05, -1, 1)

        wl, ml = part(cands.lower_pos, cands.lower_neg, cands.lower_k)
        wu, mu = part(cands.upper_pos, cands.upper_neg, cands.upper_k)
        return self.sign * ((wl + wu) + 1e-3 * (ml + mu) / (cands.lower_k + cands.upper_k))

    def leaf_count(self, cands: _Candidates) -> np.ndarray:
        return (self.party_wins(cands.lower_pos, cands.lower_neg).astype(int)
                + self.party_wins(cands.upper_pos, cands.upper_neg).astype(int))


@dataclass
class _Subplan:
    count: int
    leaves: list
    lines: list
    base: str = ""


def _leaf(engine: _Engine, node: _Node) -> _Subplan:
    pos = float(engine.ps.pos[node.idx].sum())
    neg = float(engine.ps.neg[node.idx].sum())
    return _Subplan(int(engine.party_wins(pos, neg)), [node], [], node.path)


def _best_index(scores: np.ndarray) -> int:
    return int(np.argmax(scores))


def _require(cands: _Candidates, node: _Node):
    if len(cands) == 0:
        raise InfeasibleSplit(
            f"no direction splits the region '{node.path or 'root'}' ({node.idx.size} points, "
            f"{node.k} districts) within the balance tolerance")


def _line(engine: _Engine, node: _Node, cands: _Candidates, c: int) -> dict:
    d = int(cands.direction[c])
    return {"node": node.path, "angle": float(engine.theta[d]),
            "offset": float(cands.offset[c]), "direction": d,
            "lower_districts": int(cands.lower_k[c]), "upper_districts": int(cands.upper_k[c])}


def _memoized(tag):
    def wrap(fn):
        def inner(engine, node, *args):
            if node.k == 1:
                return _leaf(engine, node)
            key = node.key(tag)
            hit = engine.memo.get(key)
            if hit is None:
                hit = engine.memo[key] = fn(engine, node, *args)
            # paths depend on where the subtree hangs; rebase them
            return _rebase(hit, node.path)
        return inner
    return wrap


def _rebase(sub: _Subplan, path: str) -> _Subplan:
    if sub.base == path:
        return sub
    cut = len(sub.base)
    leaves = [_Node(n.idx, None, n.k, path + n.path[cut:]) for n in sub.leaves]
    lines = [dict(line, node=path + line["node"][cut:]) for line in sub.lines]
    return _Subplan(sub.count, leaves, lines, path)


@_memoized("rollout")
def _rollout(engine: _Engine, node: _Node) -> _Subplan:
    cands = engine.candidates(node)
    _require(cands, node)
    if node.k == 2:
        c = _best_index(engine.sign * engine.leaf_count(cands) + 1e-6 * engine.proxy(cands))
    else:
        c = _best_index(engine.proxy(cands))
    return _expand(engine, node, cands, c, _rollout)


def _expand(engine, node, cands, c, solver) -> _Subplan:
    lo, hi = engine.children(node, cands, c)
    a, b = solver(engine, lo), solver(engine, hi)
    return _Subplan(a.count + b.count, a.leaves + b.leaves,
                    [_line(engine, node, cands, c)] + a.lines + b.lines, node.path)


@_memoized("search")
def _search(engine: _Engine, node: _Node, beam: int) -> _Subplan:
    if node.k <= 2:
        return _rollout(engine, node)
    cands = engine.candidates(node)
    _require(cands, node)
    scores = np.empty(len(cands))
    for c in range(len(cands)):
        sub = _expand(engine, node, cands, c, _rollout)
        scores[c] = engine.sign * sub.count
    # stable ordering: score, then proxy, then candidate order
    prox = engine.proxy(cands)
    ranked = np.lexsort((np.arange(len(cands)), -prox, -scores))[:beam]
    best = None
    for c in ranked:
        sub = _expand(engine, node, cands, int(c), lambda e, n: _search(e, n, beam))
        if best is None or engine.sign * sub.count > engine.sign * best.count:
            best = sub
    return best


def _random_plan(engine: _Engine, node: _Node, rng: np.random.Generator) -> _Subplan:
    if node.k == 1:
        return _leaf(engine, node)
    cands = engine.candidates(node)
    _require(cands, node)
    c = int(rng.integers(len(cands)))
    return _expand(engine, node, cands, c, lambda e, n: _random_plan(e, n, rng))


# ----------------------------------------------------------------- the plan

@dataclass(frozen=True)
class DistrictSummary:
    district: int
    path: str
    population: float
    pos: float
    neg: float
    region: np.ndarray | None = field(repr=False, default=None)
    compactness: CompactnessReport | None = None

    @property
    def winner(self) -> str:
        if self.pos > self.neg:
            return "pos"
        if self.neg > self.pos:
            return "neg"
        return "tie"


@dataclass(frozen=True)
class DistrictingPlan:
    assignments: np.ndarray = field(repr=False)
    district_count: int
    lines: list
    districts: list
    party: str
    objective: str
    majority_count: int
    tolerance: float
    seed: int | None = None

    @property
    def ideal_population(self) -> float:
        return sum(d.population for d in self.districts) / self.district_count

    def max_deviation(self) -> float:
        ideal = self.ideal_population
        return max(abs(d.population - ideal) / ideal for d in self.districts)

    def to_json(self) -> dict:
        return {
            "district_count": self.district_count,
            "party": self.party,
            "objective": self.objective,
            "majority_count": self.majority_count,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "max_population_deviation": self.max_deviation(),
            "lines": self.lines,
            "districts": [
                {
                    "district": d.district,
                    "path": d.path,
                    "population": d.population,
                    "pos": d.pos,
                    "neg": d.neg,
                    "winner": d.winner,
                    "region": None if d.region is None else d.region.tolist(),
                    "compactness": None if d.compactness is None else d.compactness.as_dict(),
                }
                for d in self.districts
            ],
        }


def _regions(state_polygon: Polygon | None, lines: list) -> dict:
    """Region of every recursion node, replayed by clipping the state along each line."""
    if state_polygon is None:
        return {}
    regions = {"": state_polygon.vertices}
    for line in lines:
        region = regions.get(line["node"])
        if region is None or len(region) < 3:
            continue
        normal = np.array([math.cos(line["angle"]), math.sin(line["angle"])])
        regions[line["node"] + "L"] = clip_halfplane(region, normal, line["offset"], True)
        regions[line["node"] + "U"] = clip_halfplane(region, normal, line["offset"], False)
    return regions


def _assemble(engine: _Engine, sub: _Subplan, state_polygon: Polygon | None, k: int,
              objective: str, tolerance: float, seed) -> DistrictingPlan:
    ps = engine.ps
    regions = _regions(state_polygon, sub.lines)
    assignments = np.full(len(ps), -1, dtype=int)
    leaves = sorted(sub.leaves, key=lambda n: n.path)
    districts = []
    for i, leaf in enumerate(leaves):
        assignments[leaf.idx] = i
        region = regions.get(leaf.path)
        report = None
        if region is not None and len(region) >= 3:
            try:
                report = compactness_report(Polygon(region))
            except GeometryError:
                report = None
        districts.append(DistrictSummary(
            i, leaf.path or "root", float(ps.pop[leaf.idx].sum()), float(ps.pos[leaf.idx].sum()),
            float(ps.neg[leaf.idx].sum()), region, report))
    plan = DistrictingPlan(assignments, k, sub.lines, districts, engine.party, objective,
                           sub.count, tolerance, seed)
    if np.any(assignments < 0):
        raise AssertionError("unassigned points")
    if plan.max_deviation() > tolerance * (1 + 1e-9):
        raise InfeasibleSplit(f"district populations deviate by {plan.max_deviation():.4%}")
    return plan


def _validate(points, k, objective, party, angles, beam):
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if objective not in ("maximize", "minimize"):
        raise ValueError(f"objective must be maximize or minimize, got {objective!r}")
    if party not in ("pos", "neg"):
        raise ValueError(f"party must be pos or neg, got {party!r}")
    if angles < 1 or beam < 1:
        raise ValueError("angles and beam must be at least 1")


def partisan_splitline(points, state_polygon: Polygon | None, k: int, objective: str = "maximize",
                       party: str = "pos", angles: int = 180, beam: int = 8, seed: int = 0,
                       tolerance: float = 0.005) -> DistrictingPlan:
    """Split-line plan maximizing (or minimizing) the districts carried by ``party``.

    The search itself is deterministic; ``seed`` only fixes the insertion order
    of the enclosing-disk routine and is recorded in the plan.
    """
    _validate(points, k, objective, party, angles, beam)
    ps = points if isinstance(points, PointSet) else PointSet(points)
    sign = 1 if objective == "maximize" else -1
    engine = _Engine(ps, angles, split_tolerance(tolerance, k), party, sign)
    sub = _search(engine, engine.root(k), beam)
    return _assemble(engine, sub, state_polygon, k, objective, tolerance, seed)


def random_splitline(points, state_polygon: Polygon | None, k: int, party: str = "pos",
                     angles: int = 180, seed: int = 0, tolerance: float = 0.005) -> DistrictingPlan:
    """Baseline plan with the same structure but a uniformly random feasible line at each node."""
    _validate(points, k, "maximize", party, angles, 1)
    ps = points if isinstance(points, PointSet) else PointSet(points)
    engine = _Engine(ps, angles, split_tolerance(tolerance, k), party, 1)
    rng = np.random.default_rng(seed)
    sub = _random_plan(engine, engine.root(k), rng)
    return _assemble(engine, sub, state_polygon, k, "random", tolerance, seed)


def bisect(points, ratio=(1, 1), angles: int = 180, tolerance: float = 0.005) -> list[Cut]:
    """Every feasible population split of ``points`` in the ratio ``m : m'``.

    One cut per direction (and per orientation when ``m != m'``); the lower
    side of the line, ``normal . p < offset``, receives the ``m`` share.
    """
    m, m2 = ratio
    if m < 1 or m2 < 1:
        raise ValueError(f"ratio parts must be positive, got {ratio}")
    if angles < 1:
        raise ValueError("angles must be at least 1")
    ps = points if isinstance(points, PointSet) else PointSet(points)
    if ps.pop.sum() <= 0:
        raise InfeasibleSplit("total population is zero")
    engine = _Engine(ps, angles, tolerance, "pos", 1)
    root = engine.root(m + m2)
    cands = engine.candidates(root, ratios=[(m, m2)])
    _require(cands, root)
    cuts = []
    for c in range(len(cands)):
        d = int(cands.direction[c])
        j = int(cands.pos_index[c])
        row = root.order[d]
        cuts.append(Cut(d, float(engine.theta[d]), float(cands.offset[c]),
                        np.sort(row[: j + 1]), np.sort(row[j + 1 :]),
                        float(cands.lower_pop[c]), float(cands.upper_pop[c]), m, m2))
    return cuts


def line_segments(plan: DistrictingPlan, state_polygon: Polygon) -> list[tuple]:
    """Drawable segments for each split line, clipped to the region it divided."""
    regions = _regions(state_polygon, plan.lines)
    segments = []
    for line in plan.lines:
        region = regions.get(line["node"])
        if region is None or len(region) < 3:
            continue
        normal = np.array([math.cos(line["angle"]), math.sin(line["angle"])])
        seg = line_segment_in(region, normal, line["offset"])
        if seg is not None:
            segments.append(seg)
    return segments


# ------------------------------------------------------------------- file I/O

def read_points_csv(path) -> list[WeightedPoint]:
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["x", "y", "pos", "neg"]:
            raise InputError(f"{path}:1: expected header x,y,pos,neg, got {header}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 4:
                raise InputError(f"{path}:{line}: expected 4 fields, got {len(row)}")
            try:
                x, y, pos, neg = (float(c) for c in row)
                points.append(WeightedPoint(x, y, pos, neg))
            except ValueError as exc:
                raise InputError(f"{path}:{line}: {exc}") from None
    if not points:
        raise InputError(f"{path}: no data rows")
    return points


def write_points_csv(path, points):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "pos", "neg"])
        for p in points:
            w.writerow([repr(p.x), repr(p.y), repr(p.pos_weight), repr(p.neg_weight)])


def read_polygon_json(path) -> Polygon:
    try:
        with open(path) as fh:
            ring = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if isinstance(ring, dict):
        ring = ring.get("ring") or ring.get("vertices") or ring.get("coordinates")
    try:
        arr = np.asarray(ring, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{path}: polygon must be a JSON list of [x, y] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f"{path}: polygon must be a JSON list of [x, y] pairs")
    try:
        return Polygon.checked(arr)
    except GeometryError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_assignments_csv(path, plan: DistrictingPlan):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point", "district"])
        for i, d in enumerate(plan.assignments):
            w.writerow([i, int(d)])
