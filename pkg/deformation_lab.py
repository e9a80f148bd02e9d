"""
One-Point Deformation Lab
Moves one point of a set along a straight rational segment, isolates every
time it crosses a line or circle through the stationary points, and checks
how circle signatures are exchanged at each crossing
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy import QQ, Poly

from exact_geometry import (
    Circle,
    DuplicatePoint,
    Point,
    PointSet,
    SplitCircleError,
    format_rational,
    orientation,
)
from generators import ExhaustedRetries, derive_seed, generate_random_general_position
from splitting_census import (
    Census,
    CensusSummary,
    CircleRecord,
    EvenCardinality,
    SplitSignature,
    census_summary,
    classify_triple,
    resolve_thread_count,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_REFINEMENTS = 200
DEFAULT_JITTER_MAGNITUDE = Fraction(1, 10**6)
LABEL_REFINEMENTS = 64

T = sympy.Symbol('t')

Triple = Tuple[int, int, int]


class DeformationError(SplitCircleError):
    """Base class for deformation failures"""


class DegenerateEndpoint(DeformationError):
    """An endpoint configuration is not in general position"""


class SimultaneousCrossing(DeformationError):
    """The path crosses two boundaries at the same parameter"""

    def __init__(self, interval: Tuple[Fraction, Fraction], boundaries: Sequence['Boundary']):
        lo, hi = interval
        names = ', '.join(str(b) for b in boundaries)
        super().__init__(f"boundaries {names} are crossed together in "
                         f"[{format_rational(lo)}, {format_rational(hi)}]; "
                         f"perturb the target (--jitter)")
        self.interval = interval
        self.boundaries = tuple(boundaries)


class TangentContact(DeformationError):
    """The path touches a circle boundary without crossing it"""

    def __init__(self, boundary: 'Boundary', t: Fraction):
        super().__init__(f"path is tangent to {boundary} at t={format_rational(t)}; "
                         f"perturb the target (--jitter)")
        self.boundary = boundary
        self.t = t


class LawViolation(DeformationError):
    """An event changed signatures in a way the exchange laws forbid"""

    def __init__(self, event: 'DeformationEvent', message: str):
        super().__init__(f"{event.boundary} at {event.describe_interval()}: {message}")
        self.event = event


@dataclass(frozen=True)
class MotionPath:
    """
    Straight-line motion of points[moving_index] to `end`, t in [0, 1]

    Both endpoint configurations must be in general position.
    """
    points: PointSet
    moving_index: int
    end: Point

    def __post_init__(self):
        if not isinstance(self.points, PointSet):
            object.__setattr__(self, 'points', PointSet(self.points))
        size = len(self.points)
        if not 0 <= self.moving_index < size:
            raise ValueError(f"moving index {self.moving_index} out of range for {size} points")
        if size < 3 or size % 2 == 0:
            raise EvenCardinality(f"expected an odd number (>= 3) of points, got {size}")
        if self.start == self.end:
            raise ValueError("path start and end coincide")
        if not self.points.gp_status.ok:
            raise DegenerateEndpoint(f"start configuration: {self.points.gp_status}")
        try:
            end_status = self.at(1).gp_status
        except DuplicatePoint as e:
            raise DegenerateEndpoint(f"end configuration: {e}") from e
        if not end_status.ok:
            raise DegenerateEndpoint(f"end configuration: {end_status}")

    @property
    def start(self) -> Point:
        return self.points[self.moving_index]

    @property
    def stationary_indices(self) -> Tuple[int, ...]:
        return tuple(i for i in range(len(self.points)) if i != self.moving_index)

    def position(self, t) -> Point:
        t = Fraction(t)
        return Point(self.start.x + t * (self.end.x - self.start.x),
                     self.start.y + t * (self.end.y - self.start.y))

    def at(self, t) -> PointSet:
        return self.points.replaced(self.moving_index, self.position(t))

    def to_dict(self) -> dict:
        return {
            'moving_index': self.moving_index,
            'start': [format_rational(self.start.x), format_rational(self.start.y)],
            'end': [format_rational(self.end.x), format_rational(self.end.y)],
        }


@dataclass(frozen=True, order=True)
class Boundary:
    """Line through two, or circle through three, stationary points"""
    kind: str
    indices: Tuple[int, ...]

    @property
    def is_line(self) -> bool:
        return self.kind == 'line'

    def __str__(self) -> str:
        return f"{self.kind.upper()}({','.join(str(i) for i in self.indices)})"

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'indices': list(self.indices)}


def _to_sympy(value) -> sympy.Rational:
    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def _to_fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def sign_at(poly: Poly, t) -> int:
    """Exact sign of a boundary polynomial at a rational parameter"""
    value = poly.eval(_to_sympy(t))
    if value.is_positive:
        return 1
    return -1 if value.is_negative else 0


def _offset(coordinate: Fraction, start: Fraction, end: Fraction) -> Poly:
    """coordinate - (start + t * (end - start)) as a polynomial in t"""
    return Poly([_to_sympy(start - end), _to_sympy(coordinate - start)], T, domain=QQ)


def boundary_polynomials(path: MotionPath) -> List[Tuple[Boundary, Poly]]:
    """
    Predicate polynomials in t for every boundary of the stationary points

    A LINE(i,j) polynomial has the sign of orientation(p(t), P_i, P_j) and
    degree at most 1. A CIRCLE(i,j,k) polynomial is positive exactly when
    p(t) is inside the circle and has degree 2.
    """
    pts = path.points
    start, end = path.start, path.end
    stationary = path.stationary_indices
    dx = {i: _offset(pts[i].x, start.x, end.x) for i in stationary}
    dy = {i: _offset(pts[i].y, start.y, end.y) for i in stationary}
    result: List[Tuple[Boundary, Poly]] = []

    for i, j in combinations(stationary, 2):
        poly = dx[i] * dy[j] - dy[i] * dx[j]
        result.append((Boundary('line', (i, j)), poly))

    for i, j, k in combinations(stationary, 3):
        lifts = {m: dx[m] * dx[m] + dy[m] * dy[m] for m in (i, j, k)}
        det = (lifts[i] * (dx[j] * dy[k] - dx[k] * dy[j])
               + lifts[j] * (dx[k] * dy[i] - dx[i] * dy[k])
               + lifts[k] * (dx[i] * dy[j] - dx[j] * dy[i]))
        if orientation(pts[i], pts[j], pts[k]) < 0:
            det = -det
        result.append((Boundary('circle', (i, j, k)), det))

    return result


@dataclass(frozen=True)
class RootInterval:
    """Rational interval [lo, hi] holding a single root of one boundary polynomial"""
    lo: Fraction
    hi: Fraction
    multiplicity: int = 1

    @property
    def exact(self) -> Optional[Fraction]:
        return self.lo if self.lo == self.hi else None

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def refined(self, poly: Poly) -> 'RootInterval':
        """At most half as wide, still isolating the same root of poly"""
        if self.exact is not None:
            return self
        lo, hi = poly.refine_root(_to_sympy(self.lo), _to_sympy(self.hi),
                                  eps=_to_sympy(self.width / 2))
        return replace(self, lo=_to_fraction(lo), hi=_to_fraction(hi))


@dataclass
class DeformationEvent:
    """One crossing of one boundary, isolated in a rational interval"""
    boundary: Boundary
    interval: RootInterval
    direction: int
    moving_index: int
    polynomial: Optional[Poly] = field(default=None, repr=False, compare=False)
    before: Dict[Triple, SplitSignature] = field(default_factory=dict)
    after: Dict[Triple, SplitSignature] = field(default_factory=dict)
    arc_label: Optional[Tuple[int, int]] = None
    changed: Tuple[Triple, ...] = ()

    @property
    def entering(self) -> bool:
        """For circles, crossing from outside to inside"""
        return self.direction > 0

    def describe_interval(self) -> str:
        if self.interval.exact is not None:
            return f"t={format_rational(self.interval.exact)}"
        return f"t in [{format_rational(self.interval.lo)}, {format_rational(self.interval.hi)}]"

    def affected_triples(self) -> List[Triple]:
        m = self.moving_index
        if self.boundary.is_line:
            i, j = self.boundary.indices
            return [tuple(sorted((m, i, j)))]
        i, j, k = self.boundary.indices
        return [(i, j, k)] + [tuple(sorted((m,) + pair)) for pair in ((i, j), (j, k), (i, k))]

    def to_dict(self) -> dict:
        def signatures(table):
            return {','.join(map(str, t)): [s.inside, s.outside] for t, s in table.items()}

        return {
            'boundary': self.boundary.to_dict(),
            'interval': [format_rational(self.interval.lo), format_rational(self.interval.hi)],
            'exact': self.interval.exact is not None,
            'direction': '-+' if self.direction > 0 else '+-',
            'before': signatures(self.before),
            'after': signatures(self.after),
            'arc_label': list(self.arc_label) if self.arc_label else None,
            'changed': [list(t) for t in self.changed],
        }


@dataclass(frozen=True)
class Checkpoint:
    t: Fraction
    census: Census

    @property
    def summary(self) -> CensusSummary:
        return census_summary(self.census)

    def to_dict(self) -> dict:
        return {'t': format_rational(self.t), 'summary': self.summary.to_dict()}


@dataclass
class DeformationLog:
    path: MotionPath
    events: List[DeformationEvent]
    checkpoints: List[Checkpoint] = field(default_factory=list)

    @property
    def census_invariant(self) -> bool:
        """Unordered-signature census identical at every checkpoint"""
        tables = [c.census.by_signature for c in self.checkpoints]
        return all(t == tables[0] for t in tables)

    def circle_events(self) -> List[DeformationEvent]:
        return [e for e in self.events if not e.boundary.is_line]

    def to_dict(self) -> dict:
        return {
            'path': self.path.to_dict(),
            'events': [e.to_dict() for e in self.events],
            'checkpoints': [c.to_dict() for c in self.checkpoints],
            'census_invariant': self.census_invariant,
        }


def _event_direction(poly: Poly, interval: RootInterval) -> int:
    if interval.exact is not None:
        return sign_at(poly.diff(T), interval.exact)
    return sign_at(poly, interval.hi)


def _rational_root_in(poly: Poly, lo: Fraction, hi: Fraction) -> Optional[Fraction]:
    for root in poly.ground_roots():
        value = _to_fraction(root)
        if lo <= value <= hi:
            return value
    return None


def isolate_events(path: MotionPath,
                   max_refinements: int = DEFAULT_MAX_REFINEMENTS) -> DeformationLog:
    """
    Isolate every boundary crossing of the path in (0, 1)

    Returns a DeformationLog holding only the events, sorted by parameter.
    Intervals are pairwise disjoint and lie strictly inside (0, 1); rational
    crossings are reported exactly.

    Raises:
        DegenerateEndpoint: a boundary vanishes at t=0 or t=1
        TangentContact: a circle polynomial has a double root in (0, 1)
        SimultaneousCrossing: two boundaries vanish at the same t
    """
    boundaries: List[Tuple[Boundary, Poly]] = []
    for boundary, poly in boundary_polynomials(path):
        if poly.is_zero or sign_at(poly, 0) == 0 or sign_at(poly, 1) == 0:
            raise DegenerateEndpoint(f"an endpoint lies on {boundary}")
        if poly.degree() > 0:
            boundaries.append((boundary, poly))
    if not boundaries:
        return DeformationLog(path, [])

    isolated = sympy.intervals([poly for _, poly in boundaries], inf=0, sup=1, strict=True)
    events: List[DeformationEvent] = []
    steps = 0
    for (lo, hi), roots in isolated:
        lo, hi = _to_fraction(lo), _to_fraction(hi)
        if len(roots) > 1:
            raise SimultaneousCrossing((lo, hi), [boundaries[index][0] for index in sorted(roots)])
        ((index, multiplicity),) = roots.items()
        boundary, poly = boundaries[index]
        exact = _rational_root_in(poly, lo, hi)
        if multiplicity > 1:
            raise TangentContact(boundary, lo if exact is None else exact)

        interval = RootInterval(exact, exact) if exact is not None else RootInterval(lo, hi)
        budget = max_refinements
        while interval.lo == 0 or interval.hi == 1:
            if budget == 0:
                raise DeformationError(f"{boundary}: root in [{format_rational(lo)}, {format_rational(hi)}] "
                                       f"not separated from the endpoints after {max_refinements} refinements")
            interval = interval.refined(poly)
            budget -= 1
            steps += 1
        events.append(DeformationEvent(boundary, interval, _event_direction(poly, interval),
                                       path.moving_index, poly))

    events.sort(key=lambda e: e.interval.lo)
    logger.debug(f"Isolated {len(events)} events with {steps} extra refinements")
    return DeformationLog(path, events)


def _chord_label(p: Point, points: PointSet, triple: Triple) -> Optional[Tuple[int, int]]:
    """The unique pair (a, b) of the triple whose line separates p from the third point"""
    labels = []
    for a, b in combinations(triple, 2):
        (w,) = [x for x in triple if x not in (a, b)]
        side = orientation(p, points[a], points[b])
        if side != 0 and side != orientation(points[w], points[a], points[b]):
            labels.append((a, b))
    return labels[0] if len(labels) == 1 else None


def arc_label(path: MotionPath, event: DeformationEvent) -> Optional[Tuple[int, int]]:
    """
    Pair of circle points bounding the arc the moving point crosses

    Evaluated at the exact crossing when it is rational; otherwise the
    interval is narrowed until both of its ends agree on a single chord.
    Returns None for line events or when no unique chord is found.
    """
    if event.boundary.is_line:
        return None
    triple = event.boundary.indices
    interval = event.interval
    if interval.exact is not None:
        return _chord_label(path.position(interval.exact), path.points, triple)
    for _ in range(LABEL_REFINEMENTS):
        lo = _chord_label(path.position(interval.lo), path.points, triple)
        hi = _chord_label(path.position(interval.hi), path.points, triple)
        if lo is not None and lo == hi:
            return lo
        interval = interval.refined(event.polynomial)
    return None


class _CheckpointCensus:
    """Censuses along a path, reusing the circles that do not involve the moving point"""

    def __init__(self, path: MotionPath):
        self.path = path
        m = path.moving_index
        pts = path.points
        self.triples = list(combinations(range(len(pts)), 3))
        self.static: Dict[Triple, Tuple[Circle, int, int]] = {}
        for triple in self.triples:
            if m in triple:
                continue
            circle = Circle.through(*(pts[i] for i in triple))
            inside = outside = 0
            for index in path.stationary_indices:
                if index in triple:
                    continue
                side = circle.side(pts[index])
                inside += side > 0
                outside += side < 0
            self.static[triple] = (circle, inside, outside)

    def census_at(self, t: Fraction) -> Census:
        points = self.path.at(t)
        p = points[self.path.moving_index]
        records = []
        for triple in self.triples:
            cached = self.static.get(triple)
            if cached is None:
                records.append(classify_triple(points, triple))
                continue
            circle, inside, outside = cached
            side = circle.side(p)
            records.append(CircleRecord(triple, SplitSignature(inside + (side > 0),
                                                               outside + (side < 0))))
        return Census(points, records)


def checkpoint_parameters(events: Sequence[DeformationEvent]) -> List[Fraction]:
    """One rational parameter inside every maximal event-free subinterval of [0, 1]"""
    if not events:
        return [Fraction(1, 2)]
    params = [events[0].interval.lo / 2]
    for left, right in zip(events, events[1:]):
        params.append((left.interval.hi + right.interval.lo) / 2)
    params.append((events[-1].interval.hi + 1) / 2)
    return params


def run_deformation(path: MotionPath,
                    threads: Optional[int] = None,
                    max_refinements: int = DEFAULT_MAX_REFINEMENTS) -> DeformationLog:
    """
    Isolate events, census every event-free interval and record each event's effect

    Args:
        path: Motion to simulate
        threads: Workers for the checkpoint censuses
        max_refinements: Refinement budget for pulling events off the endpoints

    Returns:
        DeformationLog with events, checkpoints and per-event signatures
    """
    log = isolate_events(path, max_refinements)
    incremental = _CheckpointCensus(path)
    params = checkpoint_parameters(log.events)

    workers = min(resolve_thread_count(threads), len(params))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            censuses = list(pool.map(incremental.census_at, params))
    else:
        censuses = [incremental.census_at(t) for t in params]
    log.checkpoints = [Checkpoint(t, c) for t, c in zip(params, censuses)]

    for index, event in enumerate(log.events):
        before, after = censuses[index], censuses[index + 1]
        event.before = {t: before.record(t).signature for t in event.affected_triples()}
        event.after = {t: after.record(t).signature for t in event.affected_triples()}
        event.changed = tuple(b.triple for b, a in zip(before.records, after.records)
                              if b.signature != a.signature)
        event.arc_label = arc_label(path, event)

    if log.census_invariant:
        logger.info(f"Deformation of point {path.moving_index}: {len(log.events)} events, "
                    f"census unchanged across {len(log.checkpoints)} checkpoints")
    else:
        logger.warning(f"Deformation of point {path.moving_index}: census changed between checkpoints")
    return log


@dataclass(frozen=True)
class ExchangeVerdict:
    boundary: Boundary
    law: str

    def to_dict(self) -> dict:
        return {'boundary': str(self.boundary), 'law': self.law}


def check_exchange_law(event: DeformationEvent) -> ExchangeVerdict:
    """
    Check an event against the line-swap or circle-trade law

    Line crossings swap the signature of the one circle through the moving
    point and the line's two points. Circle crossings may only change the
    four circles through three of the four points involved and must keep
    the number of circles of every unordered signature. When the crossed
    arc is known the exact trade is checked: exiting across the arc cut
    off by (a, b) moves circles {a,b,w} and {m,a,b} from (s,t) to (s-1,t+1)
    and circles {m,a,w}, {m,b,w} the other way; entering reverses it.

    Raises:
        LawViolation: if the event breaks the applicable law
    """
    affected = event.affected_triples()
    stray = [t for t in event.changed if t not in affected]
    if stray:
        raise LawViolation(event, f"circles outside the event changed: {stray}")

    if event.boundary.is_line:
        (triple,) = affected
        if event.after[triple] != event.before[triple].swapped():
            raise LawViolation(event, f"circle {triple} went {event.before[triple]} -> "
                                      f"{event.after[triple]}, expected a swap")
        return ExchangeVerdict(event.boundary, 'swap')

    before = Counter(s.unordered for s in event.before.values())
    after = Counter(s.unordered for s in event.after.values())
    if before != after:
        raise LawViolation(event, f"signature classes not conserved: {dict(before)} -> {dict(after)}")
    if event.arc_label is None:
        return ExchangeVerdict(event.boundary, 'conservation')

    m = event.moving_index
    a, b = event.arc_label
    (w,) = [x for x in event.boundary.indices if x not in (a, b)]
    circle = event.boundary.indices
    shrinking = [circle, tuple(sorted((m, a, b)))]
    growing = [tuple(sorted((m, a, w))), tuple(sorted((m, b, w)))]
    # state with the moving point inside the crossed circle, then outside
    held, released = (event.after, event.before) if event.entering else (event.before, event.after)

    big = held[circle]
    small = SplitSignature(big.inside - 1, big.outside + 1)
    expected = {}
    for t in shrinking:
        expected[t] = (big, small)
    for t in growing:
        expected[t] = (small, big)
    for t, (pre, post) in expected.items():
        if held[t] != pre or released[t] != post:
            raise LawViolation(event, f"circle {t} went {held[t]} -> {released[t]} "
                                      f"(exiting order), expected {pre} -> {post}")
    return ExchangeVerdict(event.boundary, 'trade')


def jitter_target(target: Point, seed: int, attempt: int,
                  magnitude: Fraction = DEFAULT_JITTER_MAGNITUDE) -> Point:
    """Seeded nonzero rational nudge of at most `magnitude` per coordinate"""
    rng = np.random.default_rng(derive_seed(seed, attempt))
    steps = rng.integers(1, 1000, size=2, endpoint=True)
    signs = rng.choice([-1, 1], size=2)
    scale = Fraction(magnitude) / 1000
    return target.translated(int(signs[0] * steps[0]) * scale, int(signs[1] * steps[1]) * scale)


def random_motion_path(count: int, seed: int, coordinate_bound: int = 100,
                       max_attempts: int = 200) -> MotionPath:
    """
    Random general-position set with point 0 moving to a random target

    Targets are redrawn only while they coincide with the start or leave an
    endpoint configuration out of general position. Tangencies and
    simultaneous crossings along the path are left for isolate_events to
    report.

    Raises:
        ExhaustedRetries: if no usable target is found
    """
    points = generate_random_general_position(count, seed, coordinate_bound)
    rng = np.random.default_rng(derive_seed(seed, count, coordinate_bound))
    for _ in range(max_attempts):
        x, y = rng.integers(-coordinate_bound, coordinate_bound, size=2, endpoint=True)
        target = Point(int(x), int(y))
        if target == points[0]:
            continue
        try:
            path = MotionPath(points, 0, target)
        except DegenerateEndpoint as e:
            logger.debug(f"Redrawing target {target}: {e}")
            continue
        return path
    raise ExhaustedRetries(f"no usable motion target for seed {seed} after {max_attempts} draws")
