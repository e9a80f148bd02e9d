"""Tests for the circle census and the counting identities it must satisfy"""

from itertools import combinations
from math import comb

import pytest

from conftest import CORPUS_SEEDS, make_points
from exact_geometry import GPKind
from generators import construct_degenerate_quad, generate_random_general_position
from splitting_census import (
    BadSignature,
    CollinearTriple,
    EvenCardinality,
    InvalidPair,
    NotGeneralPosition,
    SplitSignature,
    THREADS_ENV,
    build_census,
    census_summary,
    check_census_theorems,
    closure_holds,
    convex_hull,
    count_ab_splitting,
    count_point_splitting,
    count_point_splitting_degenerate,
    degenerate_circles,
    lower_bound,
    pair_counts,
    predicted_count,
    resolve_thread_count,
    splitting_circles_through_pair,
    sweep_point_splitting_circle,
)


def _det(rows):
    """Cofactor expansion over plain integers"""
    if len(rows) == 1:
        return rows[0][0]
    total = 0
    for col, value in enumerate(rows[0]):
        minor = [row[:col] + row[col + 1:] for row in rows[1:]]
        total += (-1) ** col * value * _det(minor)
    return total


def _naive_signatures(points):
    """Independent census: 3x3 and 4x4 integer determinants, one query at a time"""
    coords = [(int(p.x), int(p.y)) for p in points]
    result = {}
    for triple in combinations(range(len(coords)), 3):
        rows = [[x, y, 1] for x, y in (coords[i] for i in triple)]
        turn = _det(rows)
        inside = outside = 0
        for q, (x, y) in enumerate(coords):
            if q in triple:
                continue
            lifted = [[cx, cy, cx * cx + cy * cy, 1] for cx, cy in (coords[i] for i in triple)]
            lifted.append([x, y, x * x + y * y, 1])
            side = _det(lifted) * turn
            # positive inside a counterclockwise circle
            if side > 0:
                inside += 1
            elif side < 0:
                outside += 1
        result[triple] = SplitSignature(inside, outside)
    return result


def test_three_points_single_circle():
    points = make_points((0, 0), (4, 1), (1, 3))
    census = build_census(points)
    assert len(census.records) == 1
    assert census.records[0].signature == SplitSignature(0, 0)
    assert count_point_splitting(points) == 1
    assert splitting_circles_through_pair(points, 0, 1) == list(census.records)


def test_five_points_census():
    points = generate_random_general_position(5, 2, 1000)
    census = build_census(points)
    assert len(census.records) == 10
    assert sum(1 for r in census.records if r.signature == SplitSignature(1, 1)) == 4
    assert census.by_signature == {(0, 2): 6, (1, 1): 4}
    assert count_point_splitting(points, census) == 4

    lengths = [len(splitting_circles_through_pair(points, i, j, census))
               for i, j in combinations(range(5), 2)]
    assert set(lengths) <= {1, 3}
    assert sum(lengths) == 12


def test_seven_and_nine_point_counts():
    seven = generate_random_general_position(7, 1, 1000)
    nine = generate_random_general_position(9, 5, 1000)
    assert count_point_splitting(seven) == 9
    assert count_point_splitting(nine) == 16


def test_ab_splitting_counts():
    five = generate_random_general_position(5, 3, 1000)
    seven = generate_random_general_position(7, 3, 1000)
    nine = generate_random_general_position(9, 3, 1000)
    assert count_ab_splitting(five, 0, 2) == 6
    assert count_ab_splitting(five, 2, 0) == 6
    assert count_ab_splitting(seven, 1, 3) == 16
    assert count_ab_splitting(nine, 0, 6) == 14


def test_ab_splitting_rejects_bad_signature():
    seven = generate_random_general_position(7, 3, 1000)
    with pytest.raises(BadSignature):
        count_ab_splitting(seven, 1, 1)
    with pytest.raises(BadSignature):
        count_ab_splitting(seven, -1, 5)


def test_census_preconditions():
    with pytest.raises(EvenCardinality):
        build_census(make_points((0, 0), (4, 1), (1, 3), (7, 9)))
    with pytest.raises(NotGeneralPosition) as excinfo:
        build_census(make_points((0, 0), (1, 0), (2, 0), (0, 1), (5, 7)))
    assert excinfo.value.status.kind is GPKind.COLLINEAR_TRIPLE
    assert "COLLINEAR_TRIPLE(0,1,2)" in str(excinfo.value)


def test_pair_queries_validate_indices():
    points = generate_random_general_position(5, 2, 1000)
    with pytest.raises(InvalidPair):
        splitting_circles_through_pair(points, 1, 1)
    with pytest.raises(InvalidPair):
        splitting_circles_through_pair(points, 0, 5)


@pytest.mark.parametrize('n, rows', [
    (2, [(0, 2, 6), (1, 1, 4)]),
    (3, [(0, 4, 10), (1, 3, 16), (2, 2, 9)]),
    (4, [(0, 6, 14), (1, 5, 24), (2, 4, 30), (3, 3, 16)]),
])
def test_census_summary_rows(n, rows):
    summary = census_summary(build_census(generate_random_general_position(2 * n + 1, 11, 1000)))
    assert [(r.a, r.b, r.count) for r in summary.rows] == rows
    assert all(r.match for r in summary.rows)
    assert summary.total_circles == comb(2 * n + 1, 3)
    assert summary.all_match


def test_summary_serialization():
    summary = census_summary(build_census(generate_random_general_position(5, 2, 1000)))
    data = summary.to_dict()
    assert set(data) == {'n', 'total_circles', 'point_splitting', 'signatures', 'pairs_odd'}
    assert data['signatures'][0] == {'a': 0, 'b': 2, 'count': 6, 'predicted': 6, 'match': True}
    lines = summary.to_csv().splitlines()
    assert lines == ["a,b,count,predicted,match", "0,2,6,6,true", "1,1,4,4,true", "total,,10,10,true"]


def test_closed_forms():
    assert predicted_count(3, 1, 3) == predicted_count(3, 3, 1) == 16
    assert predicted_count(4, 3, 3) == 16
    assert lower_bound(3) == 7
    assert lower_bound(4) == 12
    assert all(closure_holds(n) for n in range(1, 12))


@pytest.mark.slow
def test_corpus_counting_identities(corpus):
    """Every corpus set satisfies every identity; pair counts are odd and sum to 3n^2"""
    for (n, seed), points in corpus.items():
        census = build_census(points)
        failed = [c for c in check_census_theorems(census) if not c.passed]
        assert not failed, f"n={n} seed={seed}: {failed}"
        assert census.point_splitting == n * n
        counts = pair_counts(census)
        assert all(c % 2 == 1 for c in counts.values())
        assert sum(counts.values()) == 3 * n * n


@pytest.mark.slow
def test_parallel_census_matches_naive_oracle(corpus):
    for (n, seed), points in corpus.items():
        if len(points) > 9:
            continue
        census = build_census(points, threads=4, parallel_threshold=1)
        assert census.signatures() == _naive_signatures(points), f"n={n} seed={seed}"


def test_record_order_independent_of_threads():
    points = generate_random_general_position(11, 4, 1000)
    single = build_census(points, threads=1)
    pooled = build_census(points, threads=4, parallel_threshold=1)
    assert single.records == pooled.records
    assert [r.triple for r in pooled.records] == list(combinations(range(11), 3))


def test_thread_count_resolution(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, '3')
    assert resolve_thread_count() == 3
    assert resolve_thread_count(2) == 2
    monkeypatch.setenv(THREADS_ENV, '0')
    assert resolve_thread_count() >= 1
    monkeypatch.setenv(THREADS_ENV, 'many')
    assert resolve_thread_count() >= 1


def test_convex_hull_counterclockwise():
    points = make_points((0, 0), (4, 0), (4, 4), (0, 4), (1, 2))
    assert convex_hull(points) == [0, 1, 2, 3]


@pytest.mark.parametrize('seed', CORPUS_SEEDS[:5])
def test_sweep_finds_point_splitting_circle(seed):
    points = generate_random_general_position(9, seed, 1000)
    hull = convex_hull(points)
    for k in range(len(hull)):
        i, j = hull[k], hull[(k + 1) % len(hull)]
        record = sweep_point_splitting_circle(points, i, j)
        assert record.contains(i, j)
        assert record.signature == SplitSignature(3, 3)


def test_sweep_rejects_non_hull_pair():
    points = make_points((0, 0), (10, 1), (9, 11), (-1, 9), (4, 5))
    with pytest.raises(InvalidPair):
        sweep_point_splitting_circle(points, 0, 4)


def test_degenerate_count_in_general_position():
    points = generate_random_general_position(7, 1, 1000)
    circles = degenerate_circles(points)
    assert len(circles) == 35
    assert count_point_splitting_degenerate(points) == 9


def test_degenerate_merges_concyclic_quadruple():
    config = construct_degenerate_quad(1, seed=3)
    circles = degenerate_circles(config.points)
    assert len(circles) == 32
    (shared,) = [c for c in circles if len(c.on_circle) == 4]
    assert shared.on_circle == (0, 1, 2, 3)
    assert (shared.inside, shared.outside) == (1, 2)
    assert shared.qualifies


def test_degenerate_rejects_collinear_triple():
    with pytest.raises(CollinearTriple):
        count_point_splitting_degenerate(make_points((0, 0), (1, 0), (2, 0), (0, 1), (5, 7)))
