import json

import numpy as np
import pytest

from voter_circle.fixtures import competitive_stripes, make_competitive_stripes
from voter_circle.geometry import Polygon
from voter_circle.splitline import (
    InfeasibleSplit,
    InputError,
    PointSet,
    WeightedPoint,
    bisect,
    depth,
    line_segments,
    partisan_splitline,
    random_splitline,
    read_points_csv,
    read_polygon_json,
    split_counts,
    split_tolerance,
    write_assignments_csv,
    write_points_csv,
)

FAST = {"angles": 36, "beam": 4}
SQUARE = Polygon(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))


@pytest.fixture(scope="module")
def stripes():
    pts, square = competitive_stripes()
    return PointSet(pts), square


@pytest.fixture(scope="module")
def plans(stripes):
    ps, square = stripes
    return {
        "max": partisan_splitline(ps, square, 8, "maximize", "pos", **FAST),
        "min": partisan_splitline(ps, square, 8, "minimize", "pos", **FAST),
        "neg": partisan_splitline(ps, square, 8, "maximize", "neg", **FAST),
    }


def unit_points(xy):
    return [WeightedPoint(float(x), float(y), 1.0, 0.0) for x, y in xy]


# ---------------------------------------------------------------- bisect

def test_bisect_square_corners():
    pts = unit_points([(0, 0), (1, 0), (1, 1), (0, 1)])
    cuts = bisect(pts, (1, 1), angles=4)
    assert len(cuts) == 4
    for c in cuts:
        assert len(c.lower) == len(c.upper) == 2
        assert c.lower_pop == c.upper_pop == 2
    assert list(cuts[0].lower) == [0, 3]   # normal (1, 0): the x <= 1/2 side
    assert list(cuts[2].lower) == [0, 1]   # normal (0, 1): the y <= 1/2 side


def test_bisect_collinear_weights():
    pts = [WeightedPoint(float(x), 0.0, w, 0.0) for x, w in zip(range(4), (3, 1, 1, 3))]
    cuts = bisect(pts, (1, 1), angles=180)
    assert cuts
    for c in cuts:
        assert c.lower_pop == c.upper_pop == 4
    along = cuts[0]
    assert list(along.lower) == [0, 1]
    assert along.offset == pytest.approx(1.5)


def test_bisect_two_to_one():
    pts = unit_points([(x, 0) for x in range(6)])
    cuts = bisect(pts, (2, 1), angles=1)
    assert len(cuts) == 1
    assert len(cuts[0].lower) == 4 and len(cuts[0].upper) == 2
    assert (cuts[0].lower_districts, cuts[0].upper_districts) == (2, 1)


def test_bisect_cuts_separate_points():
    rng = np.random.default_rng(0)
    pts = [WeightedPoint(*rng.random(2), *rng.integers(1, 50, 2).astype(float)) for _ in range(300)]
    xy = np.array([[p.x, p.y] for p in pts])
    for c in bisect(pts, (3, 2), angles=90, tolerance=0.05):
        side = xy @ c.normal
        assert np.all(side[c.lower] < c.offset) and np.all(side[c.upper] > c.offset)
        total = c.lower_pop + c.upper_pop
        assert abs(c.lower_pop - 0.6 * total) <= 0.05 * 0.4 * total + 1e-9


def test_bisect_infeasible_and_invalid():
    pts = [WeightedPoint(0.0, 0.0, 10.0, 0.0), WeightedPoint(1.0, 0.0, 1.0, 0.0),
           WeightedPoint(2.0, 0.0, 1.0, 0.0)]
    with pytest.raises(InfeasibleSplit):
        bisect(pts, (1, 1))
    with pytest.raises(ValueError):
        bisect(pts, (0, 1))
    with pytest.raises(ValueError):
        bisect(pts, (1, 1), angles=0)
    with pytest.raises(ValueError):
        WeightedPoint(0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        WeightedPoint(0.0, 0.0, -1.0, 2.0)


def test_tolerance_helpers():
    assert split_counts(5) == (3, 2)
    assert [depth(k) for k in (1, 2, 3, 4, 8, 9)] == [1, 1, 2, 2, 3, 4]
    t = split_tolerance(0.005, 8)
    assert (1 + t) ** 3 == pytest.approx(1.005)


# -------------------------------------------------------------- the plan

def test_uniform_preference_sweeps():
    rng = np.random.default_rng(1)
    pts = [WeightedPoint(x, y, 60.0, 40.0) for x, y in rng.random((400, 2))]
    plan = partisan_splitline(pts, SQUARE, 8, **FAST)
    assert plan.majority_count == 8


def test_fixture_objectives(plans):
    assert plans["max"].majority_count > plans["min"].majority_count
    assert plans["max"].majority_count >= 5
    for plan in plans.values():
        assert plan.max_deviation() <= 0.005
        assert sorted(set(plan.assignments)) == list(range(8))


def test_fixture_beats_random_baselines(stripes, plans):
    ps, square = stripes
    for seed in range(20):
        base = random_splitline(ps, square, 8, angles=FAST["angles"], seed=seed)
        assert base.max_deviation() <= 0.005
        assert plans["max"].majority_count >= base.majority_count
        assert plans["min"].majority_count <= base.majority_count


def test_plan_determinism(stripes, plans):
    ps, square = stripes
    again = partisan_splitline(PointSet(competitive_stripes()[0]), square, 8, "maximize", "pos", **FAST)
    assert np.array_equal(again.assignments, plans["max"].assignments)
    assert again.lines == plans["max"].lines
    r1 = random_splitline(ps, square, 8, angles=36, seed=3)
    r2 = random_splitline(ps, square, 8, angles=36, seed=3)
    assert np.array_equal(r1.assignments, r2.assignments)


def test_odd_district_counts(stripes):
    ps, square = stripes
    for k in (3, 5, 7):
        plan = partisan_splitline(ps, square, k, **FAST)
        assert plan.district_count == k
        assert plan.max_deviation() <= 0.005
        assert len(plan.lines) == k - 1


def test_single_district(stripes):
    ps, square = stripes
    plan = partisan_splitline(ps, square, 1, **FAST)
    assert plan.majority_count == 1
    assert plan.lines == []
    assert np.all(plan.assignments == 0)


def test_geometry_coherence(stripes, plans):
    ps, square = stripes
    for plan in plans.values():
        total = 0.0
        for d in plan.districts:
            region = Polygon(d.region)
            total += region.area
            members = ps.xy[plan.assignments == d.district]
            assert np.all(region.contains(members, tol=1e-9))
            assert d.compactness is not None
            assert 0 < d.compactness.polsby_popper <= 1
            assert 0 < d.compactness.reock <= 1
        assert total == pytest.approx(square.area, abs=1e-12)
        assert len(line_segments(plan, square)) == 7


def test_validation(stripes):
    ps, square = stripes
    with pytest.raises(ValueError):
        partisan_splitline(ps, square, 0)
    with pytest.raises(ValueError):
        partisan_splitline(ps, square, 2, objective="best")
    with pytest.raises(ValueError):
        partisan_splitline(ps, square, 2, party="green")
    with pytest.raises(InfeasibleSplit):
        partisan_splitline(ps, square, 8, angles=2, tolerance=1e-9)


def test_plan_json_roundtrip(plans):
    doc = json.loads(json.dumps(plans["max"].to_json()))
    assert doc["majority_count"] == plans["max"].majority_count
    assert len(doc["districts"]) == 8
    assert doc["lines"][0]["node"] == ""


# ------------------------------------------------------------------ I/O

def test_fixture_file_matches_generator():
    shipped, square = competitive_stripes()
    generated, _ = make_competitive_stripes()
    assert shipped == generated
    assert square.area == pytest.approx(1.0)
    ps = PointSet(shipped)
    assert 0.5 < ps.pos.sum() / ps.pop.sum() < 0.51


def test_points_csv_roundtrip(tmp_path):
    pts = [WeightedPoint(0.1, 0.2, 3.0, 4.5), WeightedPoint(1e-3, -2.0, 0.0, 1.0)]
    path = tmp_path / "p.csv"
    write_points_csv(path, pts)
    assert read_points_csv(path) == pts


@pytest.mark.parametrize("body, line", [
    ("x,y,votes\n1,2,3\n", 1),
    ("x,y,pos,neg\n1,2,3,4\n1,2,3\n", 3),
    ("x,y,pos,neg\n1,2,3,4\n\n1,2,abc,4\n", 4),
    ("x,y,pos,neg\n1,2,0,0\n", 2),
])
def test_points_csv_errors_name_the_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(InputError, match=f"bad.csv:{line}:"):
        read_points_csv(path)


def test_points_csv_empty(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("x,y,pos,neg\n")
    with pytest.raises(InputError, match="no data rows"):
        read_points_csv(path)


def test_polygon_json(tmp_path):
    good = tmp_path / "ring.json"
    good.write_text(json.dumps({"ring": [[0, 0], [2, 0], [2, 2], [0, 2]]}))
    assert read_polygon_json(good).area == pytest.approx(4.0)
    good.write_text(json.dumps([[0, 0], [2, 0], [2, 2], [0, 2], [0, 0]]))
    assert len(read_polygon_json(good)) == 4
    bad = tmp_path / "bad.json"
    bad.write_text("[[0, 0],\n [1, 0],\n")
    with pytest.raises(InputError, match="bad.json:3:"):
        read_polygon_json(bad)
    bad.write_text(json.dumps([[0, 0], [4, 0], [0, 3], [2, 3]]))
    with pytest.raises(InputError, match="intersects"):
        read_polygon_json(bad)
    bad.write_text(json.dumps([1, 2, 3]))
    with pytest.raises(InputError, match="pairs"):
        read_polygon_json(bad)


def test_assignments_csv(tmp_path, plans):
    path = tmp_path / "a.csv"
    write_assignments_csv(path, plans["max"])
    rows = path.read_text().splitlines()
    assert rows[0] == "point,district"
    assert len(rows) == len(plans["max"].assignments) + 1
