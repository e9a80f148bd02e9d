"""
Splitting-Circle Census
Enumerates every circle through three points of a planar set, records how
many points fall inside and outside it, and answers the counting questions
asked about point-splitting and (a,b)-splitting circles
"""

import logging
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

from exact_geometry import (
    Circle,
    GPKind,
    Point,
    PointSet,
    SplitCircleError,
    find_collinear_triple,
    orientation,
)

logger = logging.getLogger(__name__)

THREADS_ENV = 'SPLITCIRCLE_THREADS'

Triple = Tuple[int, int, int]
Pair = Tuple[int, int]


class CensusError(SplitCircleError):
    """Base class for census precondition failures"""


class NotGeneralPosition(CensusError):
    """The set has a collinear triple or a concyclic quadruple"""

    def __init__(self, status):
        super().__init__(f"point set is not in general position: {status}")
        self.status = status


class EvenCardinality(CensusError):
    """The counting statements only cover sets of 2n+1 points"""


class BadSignature(CensusError):
    """Requested (a, b) does not satisfy a + b = 2n - 2"""


class CollinearTriple(CensusError):
    """Degenerate counting is only defined when no three points are collinear"""

    def __init__(self, triple: Triple):
        super().__init__(f"points {triple} are collinear")
        self.triple = triple


class InvalidPair(CensusError):
    """Index pair is out of range, repeated, or not usable for the request"""


def resolve_thread_count(threads: Optional[int] = None) -> int:
    """
    Worker count for census evaluation

    An explicit value wins over the SPLITCIRCLE_THREADS environment
    variable; 0 (or nothing set) means one worker per CPU.
    """
    if threads is None:
        raw = os.environ.get(THREADS_ENV, '0')
        try:
            threads = int(raw)
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={raw!r}")
            threads = 0
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


@dataclass(frozen=True, order=True)
class SplitSignature:
    """Number of points strictly inside and strictly outside a circle"""
    inside: int
    outside: int

    @property
    def unordered(self) -> Tuple[int, int]:
        return (min(self.inside, self.outside), max(self.inside, self.outside))

    def swapped(self) -> 'SplitSignature':
        return SplitSignature(self.outside, self.inside)

    def is_point_splitting(self, n: int) -> bool:
        return self.inside == n - 1 and self.outside == n - 1

    def __str__(self) -> str:
        return f"({self.inside},{self.outside})"


@dataclass(frozen=True)
class CircleRecord:
    """Circle through three points of the set and its split"""
    triple: Triple
    signature: SplitSignature
    on_extra: Tuple[int, ...] = ()

    def contains(self, *indices: int) -> bool:
        return all(i in self.triple for i in indices)


def classify_triple(points: Sequence[Point], triple: Triple,
                    circle: Optional[Circle] = None) -> CircleRecord:
    """Count the points strictly inside, strictly outside and on the circle of `triple`"""
    i, j, k = triple
    if circle is None:
        circle = Circle.through(points[i], points[j], points[k])
    inside = outside = 0
    on_extra = []
    for index, p in enumerate(points):
        if index == i or index == j or index == k:
            continue
        side = circle.side(p)
        if side > 0:
            inside += 1
        elif side < 0:
            outside += 1
        else:
            on_extra.append(index)
    return CircleRecord(triple, SplitSignature(inside, outside), tuple(on_extra))


@dataclass
class Census:
    """All circles through triples of a (2n+1)-point set, in lexicographic triple order"""
    points: PointSet
    records: Tuple[CircleRecord, ...]
    by_signature: Dict[Tuple[int, int], int] = field(init=False)

    def __post_init__(self):
        self.records = tuple(self.records)
        counts = Counter(r.signature.unordered for r in self.records)
        self.by_signature = dict(sorted(counts.items()))
        self._by_triple = {r.triple: r for r in self.records}

    @property
    def n(self) -> int:
        return (len(self.points) - 1) // 2

    @property
    def point_splitting(self) -> int:
        return self.by_signature.get((self.n - 1, self.n - 1), 0)

    def record(self, triple: Sequence[int]) -> CircleRecord:
        return self._by_triple[tuple(sorted(triple))]

    def signatures(self) -> Dict[Triple, SplitSignature]:
        return {r.triple: r.signature for r in self.records}

    def point_splitting_records(self) -> List[CircleRecord]:
        n = self.n
        return [r for r in self.records if r.signature.is_point_splitting(n)]


def require_odd_general_position(points: PointSet):
    """Raise unless `points` has 2n+1 >= 3 points in general position"""
    if len(points) < 3:
        raise EvenCardinality(f"need at least 3 points, got {len(points)}")
    if len(points) % 2 == 0:
        raise EvenCardinality(f"expected an odd number of points, got {len(points)}")
    status = points.gp_status
    if not status.ok:
        raise NotGeneralPosition(status)


def _classify_chunk(points: Sequence[Point], chunk: Sequence[Triple]) -> List[CircleRecord]:
    return [classify_triple(points, triple) for triple in chunk]


def build_census(points: PointSet,
                 threads: Optional[int] = None,
                 parallel_threshold: int = 64) -> Census:
    """
    Classify every circle through three points of a general-position set

    Args:
        points: Set of 2n+1 points in general position
        threads: Worker count (None: SPLITCIRCLE_THREADS or CPU count)
        parallel_threshold: Below this many triples the census runs inline

    Returns:
        Census with C(2n+1, 3) records in lexicographic triple order

    Raises:
        EvenCardinality, NotGeneralPosition
    """
    if not isinstance(points, PointSet):
        points = PointSet(points)
    require_odd_general_position(points)

    triples = list(combinations(range(len(points)), 3))
    workers = resolve_thread_count(threads)
    if workers == 1 or len(triples) < parallel_threshold:
        records = _classify_chunk(points, triples)
    else:
        size = -(-len(triples) // (workers * 4))
        chunks = [triples[i:i + size] for i in range(0, len(triples), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, so record order stays lexicographic
            records = [r for part in pool.map(lambda c: _classify_chunk(points, c), chunks) for r in part]

    census = Census(points, records)
    logger.info(f"Census of {len(points)} points: {len(records)} circles, "
                f"{census.point_splitting} point-splitting")
    return census


def count_point_splitting(points: PointSet, census: Optional[Census] = None) -> int:
    """Number of point-splitting circles of a general-position set"""
    census = census or build_census(points)
    return census.point_splitting


def count_ab_splitting(points: PointSet, a: int, b: int, census: Optional[Census] = None) -> int:
    """
    Number of circles that are (a,b)- or (b,a)-splitting

    Raises:
        BadSignature: if a + b != 2n - 2 or either count is negative
    """
    census = census or build_census(points)
    n = census.n
    if a < 0 or b < 0 or a + b != 2 * n - 2:
        raise BadSignature(f"({a},{b}) does not satisfy a + b = {2 * n - 2} for n = {n}")
    return census.by_signature.get((min(a, b), max(a, b)), 0)


def _check_pair(points: Sequence[Point], i: int, j: int):
    size = len(points)
    if i == j:
        raise InvalidPair(f"pair indices must differ, got ({i},{j})")
    if not (0 <= i < size and 0 <= j < size):
        raise InvalidPair(f"pair ({i},{j}) out of range for {size} points")


def splitting_circles_through_pair(points: PointSet, i: int, j: int,
                                   census: Optional[Census] = None) -> List[CircleRecord]:
    """All point-splitting circles passing through points i and j"""
    _check_pair(points, i, j)
    census = census or build_census(points)
    return [r for r in census.point_splitting_records() if r.contains(i, j)]


def pair_counts(census: Census) -> Dict[Pair, int]:
    """Point-splitting circles through every unordered pair of points"""
    counts = {pair: 0 for pair in combinations(range(len(census.points)), 2)}
    for record in census.point_splitting_records():
        i, j, k = record.triple
        for pair in ((i, j), (i, k), (j, k)):
            counts[pair] += 1
    return counts


def predicted_count(n: int, a: int, b: int) -> int:
    """Closed-form number of circles with unordered signature {a, b}"""
    a, b = min(a, b), max(a, b)
    if a == b:
        return n * n
    return 2 * (a + 1) * (b + 1)


def lower_bound(n: int) -> int:
    """ceil(n(2n+1)/3): one circle per pair, each circle shared by three pairs"""
    return -(-n * (2 * n + 1) // 3)


def closure_holds(n: int) -> bool:
    """The predicted class sizes add up to the number of triples"""
    total = sum(predicted_count(n, a, 2 * n - 2 - a) for a in range(n))
    return total == comb(2 * n + 1, 3)


@dataclass(frozen=True)
class SummaryRow:
    a: int
    b: int
    count: int
    predicted: int

    @property
    def match(self) -> bool:
        return self.count == self.predicted

    def to_dict(self) -> dict:
        return {'a': self.a, 'b': self.b, 'count': self.count,
                'predicted': self.predicted, 'match': self.match}


@dataclass(frozen=True)
class CensusSummary:
    """Predicted-versus-computed table of a census"""
    n: int
    rows: Tuple[SummaryRow, ...]
    total_circles: int
    total_predicted: int
    point_splitting: int
    pairs_odd: bool

    @property
    def all_match(self) -> bool:
        return (all(row.match for row in self.rows)
                and self.total_circles == self.total_predicted
                and self.pairs_odd)

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'total_circles': self.total_circles,
            'point_splitting': self.point_splitting,
            'signatures': [row.to_dict() for row in self.rows],
            'pairs_odd': self.pairs_odd,
        }

    def to_csv(self) -> str:
        lines = ["a,b,count,predicted,match"]
        for row in self.rows:
            lines.append(f"{row.a},{row.b},{row.count},{row.predicted},{str(row.match).lower()}")
        lines.append(f"total,,{self.total_circles},{self.total_predicted},"
                     f"{str(self.total_circles == self.total_predicted).lower()}")
        return "\n".join(lines) + "\n"


def census_summary(census: Census) -> CensusSummary:
    """One row per unordered signature {a,b} with a <= b and a + b = 2n - 2"""
    n = census.n
    rows = tuple(
        SummaryRow(a, 2 * n - 2 - a,
                   census.by_signature.get((a, 2 * n - 2 - a), 0),
                   predicted_count(n, a, 2 * n - 2 - a))
        for a in range(n)
    )
    pairs_odd = all(count % 2 == 1 for count in pair_counts(census).values())
    return CensusSummary(
        n=n,
        rows=rows,
        total_circles=len(census.records),
        total_predicted=comb(2 * n + 1, 3),
        point_splitting=census.point_splitting,
        pairs_odd=pairs_odd,
    )


@dataclass(frozen=True)
class TheoremCheck:
    """One named counting identity, evaluated on a census"""
    name: str
    expected: object
    actual: object

    @property
    def passed(self) -> bool:
        return self.expected == self.actual

    def to_dict(self) -> dict:
        return {'name': self.name, 'expected': self.expected,
                'actual': self.actual, 'passed': self.passed}


def check_census_theorems(census: Census) -> List[TheoremCheck]:
    """Evaluate every counting identity a general-position census must satisfy"""
    n = census.n
    ps = census.point_splitting
    summary = census_summary(census)
    pairs = pair_counts(census)

    checks = [TheoremCheck("point_splitting == n^2", n * n, ps)]
    for row in summary.rows:
        if row.a < row.b:
            checks.append(TheoremCheck(f"class {{{row.a},{row.b}}} == 2(a+1)(b+1)",
                                       row.predicted, row.count))
    checks.extend([
        TheoremCheck("classes sum to C(2n+1,3)", comb(2 * n + 1, 3), summary.total_circles),
        TheoremCheck("point_splitting parity == n parity", n % 2, ps % 2),
        TheoremCheck("point_splitting >= ceil(n(2n+1)/3)", True, ps >= lower_bound(n)),
        TheoremCheck("every pair lies on an odd number", True,
                     all(c % 2 == 1 for c in pairs.values())),
        TheoremCheck("pair counts sum to 3 * point_splitting", 3 * ps, sum(pairs.values())),
    ])
    return checks


def convex_hull(points: Sequence[Point]) -> List[int]:
    """Indices of the convex hull vertices in counterclockwise order (monotone chain)"""
    order = sorted(range(len(points)), key=lambda i: (points[i].x, points[i].y))
    if len(order) < 3:
        return order

    def half(indices):
        chain: List[int] = []
        for i in indices:
            while len(chain) >= 2 and orientation(points[chain[-2]], points[chain[-1]], points[i]) <= 0:
                chain.pop()
            chain.append(i)
        return chain

    lower = half(order)
    upper = half(reversed(order))
    return lower[:-1] + upper[:-1]


def sweep_point_splitting_circle(points: PointSet, i: int, j: int) -> CircleRecord:
    """
    Point-splitting circle through two consecutive hull vertices, found by sweeping

    The centre of a circle through A = points[i] and B = points[j] slides
    along the perpendicular bisector of AB, starting far out on the side
    of the other points (where the circle holds all of them). Each point P
    leaves the circle when the centre passes the centre of circle ABP; the
    circle through A, B and the n-th point to leave is point-splitting.

    Raises:
        InvalidPair: if (i, j) is not an edge of the convex hull
    """
    require_odd_general_position(points)
    _check_pair(points, i, j)
    hull = convex_hull(points)
    edges = {frozenset((hull[k], hull[(k + 1) % len(hull)])) for k in range(len(hull))}
    if frozenset((i, j)) not in edges:
        raise InvalidPair(f"({i},{j}) is not an edge of the convex hull")

    a, b = points[i], points[j]
    mx, my = (a.x + b.x) / 2, (a.y + b.y) / 2
    ux, uy = a.y - b.y, b.x - a.x
    others = [k for k in range(len(points)) if k not in (i, j)]
    if (points[others[0]].x - mx) * ux + (points[others[0]].y - my) * uy < 0:
        ux, uy = -ux, -uy

    def centre_parameter(k: int) -> Fraction:
        p = points[k]
        dx, dy = p.x - mx, p.y - my
        ax, ay = a.x - mx, a.y - my
        return (dx * dx + dy * dy - ax * ax - ay * ay) / (2 * (dx * ux + dy * uy))

    loss_order = sorted(others, key=centre_parameter, reverse=True)
    nth = loss_order[points.n - 1]
    logger.debug(f"Sweep along bisector of ({i},{j}) loses points in order {loss_order}")
    return classify_triple(points, tuple(sorted((i, j, nth))))


@dataclass(frozen=True)
class DistinctCircle:
    """A circle through at least three points of a (possibly degenerate) set"""
    on_circle: Tuple[int, ...]
    inside: int
    outside: int
    qualifies: bool

    def to_dict(self) -> dict:
        return {'on_circle': list(self.on_circle), 'inside': self.inside,
                'outside': self.outside, 'point_splitting': self.qualifies}


def degenerate_circles(points: PointSet) -> List[DistinctCircle]:
    """
    Distinct circles through three or more points, concyclic triples merged

    A circle qualifies as point-splitting when at most n-1 points lie
    strictly inside and at most n-1 strictly outside, so the points on the
    circle beyond three can be shared out to reach an exact (n-1, n-1) split.

    Raises:
        EvenCardinality, CollinearTriple
    """
    if len(points) < 3 or len(points) % 2 == 0:
        raise EvenCardinality(f"expected an odd number (>= 3) of points, got {len(points)}")
    collinear = find_collinear_triple(points)
    if collinear is not None:
        raise CollinearTriple(collinear)

    n = points.n
    seen = {}
    for triple in combinations(range(len(points)), 3):
        i, j, k = triple
        circle = Circle.through(points[i], points[j], points[k])
        if circle.key in seen:
            continue
        record = classify_triple(points, triple, circle)
        s = record.signature
        seen[circle.key] = DistinctCircle(
            on_circle=tuple(sorted(triple + record.on_extra)),
            inside=s.inside,
            outside=s.outside,
            qualifies=s.inside <= n - 1 and s.outside <= n - 1,
        )
    return list(seen.values())


def count_point_splitting_degenerate(points: PointSet) -> int:
    """Point-splitting count with concyclic points allowed, each circle counted once"""
    circles = degenerate_circles(points)
    count = sum(1 for c in circles if c.qualifies)
    if points.gp_status.kind is GPKind.CONCYCLIC_QUADRUPLE:
        logger.info(f"Degenerate census: {count} point-splitting circles "
                    f"among {len(circles)} distinct circles")
    return count
