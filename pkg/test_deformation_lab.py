"""Tests for event isolation along a moving point's path and the exchange laws"""

from dataclasses import replace
from fractions import Fraction

import pytest
import sympy

import deformation_lab
from conftest import make_points
from deformation_lab import (
    DegenerateEndpoint,
    LawViolation,
    MotionPath,
    SimultaneousCrossing,
    TangentContact,
    boundary_polynomials,
    check_exchange_law,
    isolate_events,
    jitter_target,
    random_motion_path,
    run_deformation,
    sign_at,
)
from exact_geometry import Point
from splitting_census import SplitSignature, build_census

CHORD_EVENTS = [
    'LINE(1,4)', 'CIRCLE(1,2,3)', 'CIRCLE(1,3,4)', 'LINE(1,3)', 'LINE(3,4)',
    'LINE(2,3)', 'CIRCLE(2,3,4)', 'CIRCLE(1,2,3)', 'LINE(2,4)',
]


@pytest.fixture
def line_path(line_crossing_set):
    return MotionPath(line_crossing_set, 0, Point(5, Fraction(-1, 10)))


@pytest.fixture
def chord_path(chord_set):
    return MotionPath(chord_set, 0, Point(10, 1))


def test_single_line_crossing(line_path):
    log = run_deformation(line_path)
    (event,) = log.events
    assert str(event.boundary) == 'LINE(1,2)'
    assert event.interval.exact == Fraction(1, 2)
    assert event.direction == -1
    assert event.before == {(0, 1, 2): SplitSignature(0, 2)}
    assert event.after == {(0, 1, 2): SplitSignature(2, 0)}
    assert event.changed == ((0, 1, 2),)
    assert event.arc_label is None
    assert check_exchange_law(event).law == 'swap'


def test_line_crossing_checkpoints(line_path):
    log = run_deformation(line_path)
    assert [c.t for c in log.checkpoints] == [Fraction(1, 4), Fraction(3, 4)]
    for checkpoint in log.checkpoints:
        assert checkpoint.census.by_signature == {(0, 2): 6, (1, 1): 4}
    assert log.census_invariant


def test_checkpoints_agree_with_endpoint_censuses(line_path):
    log = run_deformation(line_path)
    assert log.checkpoints[0].census.signatures() == build_census(line_path.at(0)).signatures()
    assert log.checkpoints[-1].census.signatures() == build_census(line_path.at(1)).signatures()


def test_polynomial_degrees(chord_path):
    polys = {str(b): p for b, p in boundary_polynomials(chord_path)}
    assert len(polys) == 10
    assert polys['LINE(1,2)'].degree() == 0
    assert not polys['LINE(1,2)'].is_zero
    assert polys['CIRCLE(1,2,3)'].degree() == 2
    assert all(p.degree() <= 1 for name, p in polys.items() if name.startswith('LINE'))


def test_chord_path_event_order(chord_path):
    log = isolate_events(chord_path)
    assert [str(e.boundary) for e in log.events] == CHORD_EVENTS
    exact = {str(e.boundary): e.interval.exact for e in log.events if e.boundary.is_line}
    assert exact == {
        'LINE(1,4)': Fraction(29, 120),
        'LINE(1,3)': Fraction(3, 10),
        'LINE(3,4)': Fraction(1, 2),
        'LINE(2,3)': Fraction(7, 10),
        'LINE(2,4)': Fraction(91, 120),
    }
    for left, right in zip(log.events, log.events[1:]):
        assert left.interval.hi < right.interval.lo
    assert all(0 < e.interval.lo and e.interval.hi < 1 for e in log.events)


def test_chord_path_circle_trades(chord_path):
    log = run_deformation(chord_path)
    enter, leave = [e for e in log.events if str(e.boundary) == 'CIRCLE(1,2,3)']

    assert enter.entering and not leave.entering
    assert enter.before[(1, 2, 3)] == SplitSignature(0, 2)
    assert enter.after[(1, 2, 3)] == SplitSignature(1, 1)
    assert enter.arc_label == (1, 3)
    assert leave.before[(1, 2, 3)] == SplitSignature(1, 1)
    assert leave.after[(1, 2, 3)] == SplitSignature(0, 2)
    assert leave.arc_label == (2, 3)

    assert log.census_invariant
    verdicts = [check_exchange_law(e).law for e in log.events]
    assert verdicts == ['trade' if name.startswith('CIRCLE') else 'swap' for name in CHORD_EVENTS]


def test_event_count_matches_dense_sampling(chord_path):
    samples = [Fraction(k, 2000) for k in range(2001)]
    flips = 0
    for _, poly in boundary_polynomials(chord_path):
        signs = [s for s in (sign_at(poly, t) for t in samples) if s]
        flips += sum(left != right for left, right in zip(signs, signs[1:]))
    assert flips == len(isolate_events(chord_path).events) == 9


def test_directions_sum_to_endpoint_change(chord_path):
    log = isolate_events(chord_path)
    for boundary, poly in boundary_polynomials(chord_path):
        total = sum(e.direction for e in log.events if e.boundary == boundary)
        assert 2 * total == sign_at(poly, 1) - sign_at(poly, 0)


def test_census_constant_between_events(chord_path):
    log = isolate_events(chord_path)
    for left, right in zip(log.events, log.events[1:]):
        lo, hi = left.interval.hi, right.interval.lo
        first = build_census(chord_path.at(lo + (hi - lo) / 3))
        second = build_census(chord_path.at(lo + 2 * (hi - lo) / 3))
        assert first.signatures() == second.signatures()


def test_degenerate_endpoint(chord_set):
    with pytest.raises(DegenerateEndpoint):
        MotionPath(chord_set, 0, Point(0, 1))


def test_path_argument_errors(chord_set):
    with pytest.raises(ValueError):
        MotionPath(chord_set, 5, Point(10, 1))
    with pytest.raises(ValueError):
        MotionPath(chord_set, 0, Point(-10, 1))


def test_simultaneous_crossing(chord_set):
    # passes through point 3 at t = 1/2
    path = MotionPath(chord_set, 0, Point(10, 9))
    with pytest.raises(SimultaneousCrossing) as excinfo:
        isolate_events(path)
    assert '--jitter' in str(excinfo.value)


def test_tangent_contact():
    points = make_points((-9, -5), (-5, 0), (5, 0), (0, 5), (0, -30))
    with pytest.raises(TangentContact) as excinfo:
        isolate_events(MotionPath(points, 0, Point(11, -5)))
    assert str(excinfo.value.boundary) == 'CIRCLE(1,2,3)'


def test_tampered_event_is_rejected(line_path):
    (event,) = run_deformation(line_path).events
    tampered = replace(event, after={(0, 1, 2): SplitSignature(0, 2)})
    with pytest.raises(LawViolation):
        check_exchange_law(tampered)


def test_tampered_circle_event_is_rejected(chord_path):
    log = run_deformation(chord_path)
    event = next(e for e in log.events if not e.boundary.is_line)
    after = dict(event.after)
    after[event.boundary.indices] = event.before[event.boundary.indices]
    with pytest.raises(LawViolation):
        check_exchange_law(replace(event, after=after))


def test_jitter_target():
    target = Point(10, 9)
    first = jitter_target(target, seed=3, attempt=0)
    assert first == jitter_target(target, seed=3, attempt=0)
    assert first != jitter_target(target, seed=3, attempt=1)
    bound = Fraction(1, 10**6)
    assert 0 < abs(first.x - target.x) <= bound
    assert 0 < abs(first.y - target.y) <= bound


def test_jittered_target_resolves_simultaneous_crossing(chord_set):
    path = MotionPath(chord_set, 0, jitter_target(Point(10, 9), seed=0, attempt=0))
    log = run_deformation(path)
    assert log.census_invariant
    for event in log.events:
        check_exchange_law(event)


def test_log_serialization(line_path):
    data = run_deformation(line_path).to_dict()
    assert data['path']['end'] == ['5/1', '-1/10']
    assert data['events'][0]['direction'] == '+-'
    assert data['events'][0]['exact'] is True
    assert data['census_invariant'] is True


def test_cap_crossed_twice_at_irrational_parameters(cap_set):
    path = MotionPath(cap_set, 0, Point(10, Fraction(9, 2)))
    log = run_deformation(path)
    assert [str(e.boundary) for e in log.events] == [
        'LINE(1,3)', 'CIRCLE(1,2,3)', 'CIRCLE(1,2,3)', 'CIRCLE(2,3,4)', 'LINE(2,3)',
    ]
    assert log.events[0].interval.exact == Fraction(1, 40)
    assert log.events[-1].interval.exact == Fraction(39, 40)

    enter, leave = log.events[1:3]
    assert enter.interval.exact is None and leave.interval.exact is None
    assert enter.interval.hi < leave.interval.lo
    offset = sympy.sqrt(19) / 40
    half = sympy.Rational(1, 2)
    assert _rational(enter.interval.lo) < half - offset < _rational(enter.interval.hi)
    assert _rational(leave.interval.lo) < half + offset < _rational(leave.interval.hi)

    assert enter.entering and not leave.entering
    assert enter.before[(1, 2, 3)] == SplitSignature(0, 2)
    assert enter.after[(1, 2, 3)] == SplitSignature(1, 1)
    assert leave.before == enter.after
    assert leave.after == enter.before
    assert enter.arc_label == leave.arc_label == (1, 2)
    assert [check_exchange_law(e).law for e in (enter, leave)] == ['trade', 'trade']
    assert log.census_invariant


def test_random_motion_path_leaves_crossings_to_isolation(monkeypatch):
    def refuse(*args, **kwargs):
        raise SimultaneousCrossing((Fraction(0), Fraction(1)), [])

    monkeypatch.setattr(deformation_lab, 'isolate_events', refuse)
    path = random_motion_path(7, seed=0)
    assert path.end != path.start
    assert path.points.gp_status.ok and path.at(1).gp_status.ok


def _rational(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def _assert_shared_root(path, error):
    polys = dict(boundary_polynomials(path))
    first, second = error.boundaries[:2]
    assert first != second
    common = polys[first].gcd(polys[second])
    lo, hi = error.interval
    assert common.degree() >= 1
    assert common.count_roots(_rational(lo), _rational(hi)) >= 1


def _assert_double_root(path, error):
    poly = dict(boundary_polynomials(path))[error.boundary]
    double = poly.gcd(poly.diff())
    assert double.degree() == 1
    (root,) = double.ground_roots()
    assert 0 < root < 1


@pytest.mark.slow
def test_random_paths_conserve_census():
    completed = rich = 0
    for seed in range(200):
        if completed == 50:
            break
        count = (7, 9, 11)[seed % 3]
        path = random_motion_path(count, seed)
        try:
            log = run_deformation(path)
        except SimultaneousCrossing as e:
            _assert_shared_root(path, e)
            continue
        except TangentContact as e:
            _assert_double_root(path, e)
            continue
        assert log.census_invariant, f"seed {seed}"
        for event in log.events:
            check_exchange_law(event)
        if len(log.circle_events()) >= 3:
            rich += 1
        completed += 1
    assert completed == 50
    assert rich >= 10
