"""
Point-Set Generators
Seeded random general-position sets, the recursive regular-polygon
configuration with every structural claim re-verified exactly, and seven-point
sets with a single concyclic quadruple
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np

from exact_geometry import (
    Circle,
    DuplicatePoint,
    Point,
    PointSet,
    SplitCircleError,
    find_collinear_triple,
    find_concyclic_quadruples,
    format_rational,
    in_circle,
    orientation,
)
from splitting_census import Census, build_census

logger = logging.getLogger(__name__)

DEFAULT_COORDINATE_BOUND = 1000
DEFAULT_MAX_RETRIES = 10000
DEFAULT_SECTION3_ATTEMPTS = 24
DEFAULT_DEGENERATE_ATTEMPTS = 2000

# Offsets are drawn as k / OFFSET_STEPS * epsilon / 4 with 0 < |k| <= OFFSET_STEPS
OFFSET_STEPS = 1000


class ExhaustedRetries(SplitCircleError):
    """Rejection sampling ran out of its retry budget"""


class ConstructionFailed(SplitCircleError):
    """A construction could not be verified within its attempt limit"""


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit sub-seed for (seed, *keys)"""
    state = np.random.SeedSequence([seed, *keys]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def generate_random_general_position(count: int, seed: int,
                                     coordinate_bound: int = DEFAULT_COORDINATE_BOUND,
                                     max_retries: int = DEFAULT_MAX_RETRIES) -> PointSet:
    """
    Integer points drawn uniformly from [-bound, bound]^2, resampling degenerate draws

    A candidate is rejected if it repeats a point, lies on a line through
    two accepted points, or lies on a circle through three of them.

    Args:
        count: Number of points (>= 3)
        seed: Seed for numpy's PCG64 generator
        coordinate_bound: Half-width of the coordinate box (>= count)
        max_retries: Total rejected draws allowed

    Raises:
        ExhaustedRetries: if more than max_retries draws are rejected
    """
    if count < 3:
        raise ValueError(f"count must be at least 3, got {count}")
    if coordinate_bound < count:
        raise ValueError(f"coordinate_bound {coordinate_bound} is smaller than count {count}")

    rng = np.random.default_rng(seed)
    points: List[Point] = []
    circles: List[Circle] = []
    rejected = 0

    while len(points) < count:
        x, y = rng.integers(-coordinate_bound, coordinate_bound, size=2, endpoint=True)
        candidate = Point(int(x), int(y))
        if (candidate in points
                or any(orientation(a, b, candidate) == 0 for a, b in combinations(points, 2))
                or any(c.side(candidate) == 0 for c in circles)):
            rejected += 1
            if rejected > max_retries:
                raise ExhaustedRetries(
                    f"{rejected} rejected draws placing point {len(points)} of {count} "
                    f"in [-{coordinate_bound}, {coordinate_bound}]^2"
                )
            continue
        circles.extend(Circle.through(a, b, candidate) for a, b in combinations(points, 2))
        points.append(candidate)

    logger.debug(f"Random set of {count} points (seed {seed}) after {rejected} rejections")
    return PointSet(points)


@dataclass(frozen=True)
class Section3Config:
    """
    Perturbed regular (2n-1)-gon around a centre point plus one far point

    Index 0 is the centre O, indices 1..2n-1 the polygon vertices in
    counterclockwise order starting from the top, index 2n the far point Q
    on the positive x-axis.
    """
    points: PointSet
    n: int
    epsilon: Fraction
    q_distance: Fraction
    seed: int = 0

    origin_index = 0

    @property
    def q_index(self) -> int:
        return 2 * self.n

    @property
    def polygon_indices(self) -> Tuple[int, ...]:
        return tuple(range(1, 2 * self.n))

    def sidecar(self) -> dict:
        return {
            'kind': 'section3',
            'n': self.n,
            'seed': self.seed,
            'origin_index': self.origin_index,
            'q_index': self.q_index,
            'polygon_indices': list(self.polygon_indices),
            'epsilon': format_rational(self.epsilon),
            'q_distance': format_rational(self.q_distance),
        }

    def header(self) -> List[str]:
        return [f"section3 n={self.n} seed={self.seed}",
                f"O index {self.origin_index}, Q index {self.q_index}"]


def _polygon_vertex(i: int, m: int, epsilon: Fraction) -> Point:
    angle = math.pi / 2 + 2 * math.pi * i / m
    limit = math.ceil(4 / epsilon)
    return Point(Fraction(math.cos(angle)).limit_denominator(limit),
                 Fraction(math.sin(angle)).limit_denominator(limit))


def _far_point_distance(points: List[Point]) -> Fraction:
    """Rational x beyond (centre x + radius) of every circle through three points"""
    bound = Fraction(0)
    for a, b, c in combinations(points, 3):
        try:
            circle = Circle.through(a, b, c)
        except SplitCircleError:
            continue
        cx, _ = circle.center
        # r <= max(1, r^2)
        bound = max(bound, cx + max(Fraction(1), circle.radius_squared))
    return bound + 1


def section3_violations(points: PointSet, n: int) -> List[str]:
    """
    Every structural claim of the regular-polygon configuration that fails

    An empty list means the configuration is valid.
    """
    problems = []
    o, q = 0, 2 * n
    polygon = list(range(1, 2 * n))
    status = points.gp_status
    if not status.ok:
        return [f"not in general position: {status}"]

    for i in polygon:
        sides = [orientation(points[o], points[i], points[k]) for k in polygon if k != i]
        if sides.count(1) != n - 1:
            problems.append(f"line O P{i} splits the polygon {sides.count(1)}:{sides.count(-1)}")

    for i, j, k in combinations(polygon, 3):
        if in_circle(points[i], points[j], points[k], points[o]) <= 0:
            problems.append(f"circle P{i} P{j} P{k} does not contain O")

    for triple in combinations(range(2 * n), 3):
        a, b, c = (points[t] for t in triple)
        if in_circle(a, b, c, points[q]) >= 0:
            problems.append(f"Q is not outside circle {triple}")

    for i, j in combinations(polygon, 2):
        inside = sum(1 for k in polygon
                     if k not in (i, j) and in_circle(points[o], points[i], points[j], points[k]) > 0)
        if inside > n - 2:
            problems.append(f"circle O P{i} P{j} contains {inside} polygon vertices")

    for x, y in combinations(range(2 * n), 2):
        q_side = orientation(points[x], points[y], points[q])
        for p in range(2 * n):
            if p in (x, y):
                continue
            inside = in_circle(points[q], points[x], points[y], points[p]) > 0
            if inside != (orientation(points[x], points[y], points[p]) == q_side):
                problems.append(f"circle Q {x} {y} and line {x} {y} disagree on {p}")

    census = build_census(points)
    splitting = {r.triple for r in census.point_splitting_records()}
    for i in polygon:
        if (o, i, q) not in splitting:
            problems.append(f"circle O P{i} Q is not point-splitting")
    for i, j in combinations(polygon, 2):
        if (i, j, q) in splitting:
            problems.append(f"circle P{i} P{j} Q is point-splitting")
    return problems


def construct_section3(n: int, seed: int,
                       max_attempts: int = DEFAULT_SECTION3_ATTEMPTS) -> Section3Config:
    """
    Build the 2n+1 point recursive configuration and verify it exactly

    Polygon vertices are rational approximations of the regular (2n-1)-gon
    moved by seeded nonzero offsets of size at most epsilon/4. Q is placed
    past every circle through three of the other points and pushed further
    out until its circles split like lines. Each failed verification
    halves epsilon.

    Raises:
        ValueError: if n < 2
        ConstructionFailed: after max_attempts attempts
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    m = 2 * n - 1
    rng = np.random.default_rng(seed)
    epsilon = Fraction(1, 4 * m * m)
    problems: List[str] = []

    for attempt in range(max_attempts):
        steps = rng.integers(1, OFFSET_STEPS, size=(m, 2), endpoint=True)
        signs = rng.choice([-1, 1], size=(m, 2))
        scale = epsilon / 4 / OFFSET_STEPS
        polygon = []
        for i in range(m):
            base = _polygon_vertex(i, m, epsilon)
            polygon.append(base.translated(int(signs[i, 0] * steps[i, 0]) * scale,
                                           int(signs[i, 1] * steps[i, 1]) * scale))
        inner = [Point(0, 0)] + polygon
        if not PointSet(inner).gp_status.ok:
            logger.debug(f"n={n} attempt {attempt + 1}: polygon not in general position")
            epsilon /= 2
            continue
        q_distance = _far_point_distance(inner)

        for _ in range(max_attempts):
            try:
                points = PointSet(inner + [Point(q_distance, 0)])
            except DuplicatePoint:
                q_distance += 1
                continue
            problems = section3_violations(points, n)
            if not problems:
                logger.info(f"Regular-polygon configuration n={n} accepted on attempt {attempt + 1} "
                            f"(epsilon {epsilon}, Q at {q_distance})")
                return Section3Config(points, n, epsilon, q_distance, seed)
            if not any(p.startswith('circle Q') or p.startswith('not in general') for p in problems):
                break
            q_distance *= 2

        logger.debug(f"n={n} attempt {attempt + 1} rejected: {problems[:3]}")
        epsilon /= 2

    raise ConstructionFailed(f"no valid configuration for n={n} after {max_attempts} attempts: "
                             f"{problems[:3]}")


def circle_families(census: Census, n: int) -> Dict[Tuple[int, int], Dict[str, int]]:
    """
    Census of a regular-polygon configuration broken down by circle family

    Families name the special points on the circle: PPP (polygon only), OPP,
    QPP and OPQ.
    """
    o, q = 0, 2 * n
    families: Dict[Tuple[int, int], Dict[str, int]] = {}
    for record in census.records:
        has_o, has_q = o in record.triple, q in record.triple
        name = 'OPQ' if has_o and has_q else 'OPP' if has_o else 'QPP' if has_q else 'PPP'
        row = families.setdefault(record.signature.unordered,
                                  {'PPP': 0, 'OPP': 0, 'QPP': 0, 'OPQ': 0})
        row[name] += 1
    return families


def _gap_counts(census: Census, n: int, special: int, a: int) -> int:
    """Circles of class {a, 2n-2-a} through `special` and two vertices a+1 apart around the polygon"""
    m = 2 * n - 1
    count = 0
    for record in census.records:
        if special not in record.triple or record.signature.unordered != (a, 2 * n - 2 - a):
            continue
        i, j = sorted(t for t in record.triple if t != special)
        if i == 0 or j == 2 * n:
            continue
        gap = (j - i) % m
        if min(gap, m - gap) == a + 1:
            count += 1
    return count


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    n: int
    lhs: int
    rhs: int

    @property
    def passed(self) -> bool:
        return self.lhs == self.rhs

    def to_dict(self) -> dict:
        return {'name': self.name, 'n': self.n, 'lhs': self.lhs,
                'rhs': self.rhs, 'passed': self.passed}


@dataclass
class RecursionReport:
    seed: int
    checks: List[IdentityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[IdentityCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {'seed': self.seed, 'passed': self.passed,
                'checks': [c.to_dict() for c in self.checks]}


def verify_recursions(n_max: int, seed: int,
                      max_attempts: int = DEFAULT_SECTION3_ATTEMPTS) -> RecursionReport:
    """
    Check the recursions of the regular-polygon construction for 2 <= n <= n_max

    Each level compares the full census with the census of its 2n-1
    polygon vertices alone, then checks the per-family breakdown.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    report = RecursionReport(seed)
    checks = report.checks

    for n in range(2, n_max + 1):
        config = construct_section3(n, derive_seed(seed, n), max_attempts)
        full = build_census(config.points)
        sub = build_census(config.points.subset(config.polygon_indices))
        m = 2 * n - 1

        checks.append(IdentityCheck("N_{2n+1} = N_{2n-1} + 2n - 1", n,
                                    full.point_splitting, sub.point_splitting + m))
        checks.append(IdentityCheck("polygon alone has (n-1)^2", n,
                                    sub.point_splitting, (n - 1) ** 2))
        b0 = 2 * n - 2
        checks.append(IdentityCheck(f"N(0,{b0}) = 2b + 2", n,
                                    full.by_signature.get((0, b0), 0), 2 * b0 + 2))
        for a in range(1, n - 1):
            b = 2 * n - 2 - a
            checks.append(IdentityCheck(f"N({a},{b}) = N({a - 1},{b - 1}) + 2a + 2b + 2", n,
                                        full.by_signature.get((a, b), 0),
                                        sub.by_signature.get((a - 1, b - 1), 0) + 2 * a + 2 * b + 2))

        families = circle_families(full, n)
        empty = {'PPP': 0, 'OPP': 0, 'QPP': 0, 'OPQ': 0}
        splitting = families.get((n - 1, n - 1), empty)
        checks.extend([
            IdentityCheck("point-splitting PPP = N_{2n-1}", n, splitting['PPP'], sub.point_splitting),
            IdentityCheck("point-splitting OPQ = 2n - 1", n, splitting['OPQ'], m),
            IdentityCheck("point-splitting OPP = 0", n, splitting['OPP'], 0),
            IdentityCheck("point-splitting QPP = 0", n, splitting['QPP'], 0),
        ])
        for a in range(0, n - 1):
            b = 2 * n - 2 - a
            row = families.get((a, b), empty)
            sub_count = sub.by_signature.get((a - 1, b - 1), 0) if a else 0
            checks.extend([
                IdentityCheck(f"class ({a},{b}) OPP = 2n - 1", n, row['OPP'], m),
                IdentityCheck(f"class ({a},{b}) QPP = 2n - 1", n, row['QPP'], m),
                IdentityCheck(f"class ({a},{b}) OPQ = 0", n, row['OPQ'], 0),
                IdentityCheck(f"class ({a},{b}) PPP = N({a - 1},{b - 1}) of the polygon", n,
                              row['PPP'], sub_count),
                IdentityCheck(f"class ({a},{b}) OPP circles join vertices {a + 1} apart", n,
                              _gap_counts(full, n, 0, a), m),
                IdentityCheck(f"class ({a},{b}) QPP circles join vertices {a + 1} apart", n,
                              _gap_counts(full, n, 2 * n, a), m),
            ])

    failed = report.failures()
    if failed:
        logger.warning(f"{len(failed)} of {len(checks)} recursion checks failed")
    else:
        logger.info(f"All {len(checks)} recursion checks passed up to n={n_max}")
    return report


@dataclass(frozen=True)
class DegenerateQuadConfig:
    """Seven points, four of them (indices 0-3) on the unit circle"""
    points: PointSet
    circle_points: Tuple[int, int, int, int]
    interior_count: int
    seed: int = 0

    def sidecar(self) -> dict:
        return {
            'kind': 'degenerate',
            'seed': self.seed,
            'interior_count': self.interior_count,
            'circle_points': list(self.circle_points),
        }

    def header(self) -> List[str]:
        return [f"degenerate interior={self.interior_count} seed={self.seed}",
                f"concyclic indices {' '.join(str(i) for i in self.circle_points)}"]


def unit_circle_point(t: Fraction) -> Point:
    """Rational point ((1 - t^2)/(1 + t^2), 2t/(1 + t^2)) on the unit circle"""
    t = Fraction(t)
    return Point((1 - t * t) / (1 + t * t), 2 * t / (1 + t * t))


def _draw_offcircle_point(rng: np.random.Generator, inside: bool) -> Point:
    limit = 7 if inside else 30
    while True:
        x, y = (Fraction(int(k), 10) for k in rng.integers(-limit, limit, size=2, endpoint=True))
        r2 = x * x + y * y
        if (inside and r2 < 1) or (not inside and 1 < r2 <= 9):
            return Point(x, y)


def construct_degenerate_quad(interior_count: int, seed: int,
                              max_attempts: int = DEFAULT_DEGENERATE_ATTEMPTS) -> DegenerateQuadConfig:
    """
    Seven points with exactly one concyclic quadruple and no collinear triple

    Args:
        interior_count: How many of the three free points lie inside the circle (0 or 1)
        seed: Generator seed
        max_attempts: Number of candidate sets to try

    Raises:
        ValueError: if interior_count is not 0 or 1
        ExhaustedRetries: if no candidate passes validation
    """
    if interior_count not in (0, 1):
        raise ValueError(f"interior_count must be 0 or 1, got {interior_count}")
    rng = np.random.default_rng(seed)

    for attempt in range(max_attempts):
        params = rng.choice(np.arange(-12, 13), size=4, replace=False)
        on_circle = [unit_circle_point(Fraction(int(k), 5)) for k in sorted(params)]
        free = [_draw_offcircle_point(rng, inside=i < interior_count) for i in range(3)]
        try:
            points = PointSet(on_circle + free)
        except DuplicatePoint:
            continue
        if find_collinear_triple(points) is not None:
            continue
        if list(find_concyclic_quadruples(points)) != [(0, 1, 2, 3)]:
            continue
        logger.debug(f"Degenerate set (interior {interior_count}) found on attempt {attempt + 1}")
        return DegenerateQuadConfig(points, (0, 1, 2, 3), interior_count, seed)

    raise ExhaustedRetries(f"no valid degenerate set after {max_attempts} attempts")


def perturb_off_circle(points: PointSet, index: int,
                       offset: Fraction = Fraction(1, 10**6),
                       max_halvings: int = 64) -> PointSet:
    """
    Scale one point by (1 + offset) about the origin, halving offset until in general position

    Raises:
        ExhaustedRetries: if no offset within max_halvings works
    """
    offset = Fraction(offset)
    for _ in range(max_halvings):
        try:
            candidate = points.replaced(index, points[index].scaled(1 + offset))
        except DuplicatePoint:
            offset /= 2
            continue
        if candidate.gp_status.ok:
            return candidate
        offset /= 2
    raise ExhaustedRetries(f"point {index} could not be moved into general position")


def random_header(count: int, seed: int, coordinate_bound: int) -> List[str]:
    return [f"random count={count} seed={seed} bound={coordinate_bound}"]

