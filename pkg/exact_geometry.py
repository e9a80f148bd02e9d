"""
Exact Geometry Kernel for Point-Splitting Circles
Rational points, sign-exact orientation / in-circle predicates,
general-position validation and the point-set text format
"""

import logging
from collections.abc import Sequence as SequenceABC
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str]


class SplitCircleError(ValueError):
    """Base class for every domain error raised by splitcircle"""


class DuplicatePoint(SplitCircleError):
    """Two points of a set coincide"""

    def __init__(self, first: int, second: int):
        super().__init__(f"points {first} and {second} coincide")
        self.indices = (first, second)


class DegenerateCircle(SplitCircleError):
    """Three collinear points do not determine a circle"""


class PointFormatError(SplitCircleError):
    """Malformed line in a point-set text file"""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def to_rational(value: RationalLike) -> Fraction:
    """Convert ints, Fractions and 'num/den' strings; floats are refused"""
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction, int or 'num/den' string")
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    """Serialize as 'num/den' (denominator always written)"""
    return f"{value.numerator}/{value.denominator}"


def sign(value) -> int:
    return (value > 0) - (value < 0)


def _exact(value: Fraction) -> Union[int, Fraction]:
    """Plain int when the denominator is 1, so integer inputs stay on int arithmetic"""
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class Point:
    """Planar point with exact rational coordinates"""
    x: Fraction
    y: Fraction
    # x^2 + y^2, the paraboloid lift used by every in-circle evaluation
    lift: Fraction = field(init=False, repr=False, compare=False)
    # (x, y, lift) as ints for integral points, Fractions otherwise
    kernel: Tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x = to_rational(self.x)
        y = to_rational(self.y)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'lift', x * x + y * y)
        object.__setattr__(self, 'kernel', (_exact(x), _exact(y), _exact(self.lift)))

    def __str__(self) -> str:
        return f"({format_rational(self.x)}, {format_rational(self.y)})"

    def translated(self, dx: RationalLike, dy: RationalLike) -> 'Point':
        return Point(self.x + to_rational(dx), self.y + to_rational(dy))

    def scaled(self, factor: RationalLike) -> 'Point':
        f = to_rational(factor)
        return Point(self.x * f, self.y * f)


def orientation(a: Point, b: Point, c: Point) -> int:
    """
    Sign of the determinant |b-a, c-a|

    Returns:
        +1 if (a, b, c) turns counterclockwise, -1 if clockwise, 0 if collinear
    """
    ax, ay, _ = a.kernel
    bx, by, _ = b.kernel
    cx, cy, _ = c.kernel
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return sign(det)


def in_circle(a: Point, b: Point, c: Point, p: Point) -> int:
    """
    Position of p relative to the circle through a, b, c

    The lifting determinant is evaluated relative to p and its sign is
    multiplied by the orientation of (a, b, c), so the answer does not
    depend on the order in which a, b, c are given.

    Args:
        a, b, c: Points defining the circle (must not be collinear)
        p: Query point

    Returns:
        +1 strictly inside, -1 strictly outside, 0 on the circle

    Raises:
        DegenerateCircle: if a, b, c are collinear
    """
    turn = orientation(a, b, c)
    if turn == 0:
        raise DegenerateCircle(f"{a}, {b}, {c} are collinear")

    px, py, _ = p.kernel
    adx, ady = a.kernel[0] - px, a.kernel[1] - py
    bdx, bdy = b.kernel[0] - px, b.kernel[1] - py
    cdx, cdy = c.kernel[0] - px, c.kernel[1] - py
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdx * cdy - cdx * bdy)
           + blift * (cdx * ady - adx * cdy)
           + clift * (adx * bdy - bdx * ady))
    return sign(det) * turn


@dataclass(frozen=True)
class Circle:
    """
    Circle w*(x^2 + y^2) + d*x + e*y + f = 0 through three non-collinear points

    Holding the implicit equation lets a census classify many query points
    against one circle with three multiplications each. The scale w is kept
    positive and, for integral points, every coefficient is an int.
    """
    w: Union[int, Fraction]
    d: Union[int, Fraction]
    e: Union[int, Fraction]
    f: Union[int, Fraction]

    @classmethod
    def through(cls, a: Point, b: Point, c: Point) -> 'Circle':
        ax, ay, alift = a.kernel
        bx, by = b.kernel[0] - ax, b.kernel[1] - ay
        cx, cy = c.kernel[0] - ax, c.kernel[1] - ay
        w = bx * cy - by * cx
        if w == 0:
            raise DegenerateCircle(f"{a}, {b}, {c} are collinear")
        lb = b.kernel[2] - alift
        lc = c.kernel[2] - alift
        d = lc * by - lb * cy
        e = lb * cx - lc * bx
        f = -alift * w - d * ax - e * ay
        if w < 0:
            w, d, e, f = -w, -d, -e, -f
        return cls(w, d, e, f)

    def side(self, p: Point) -> int:
        """+1 strictly inside, -1 strictly outside, 0 on the circle"""
        x, y, lift = p.kernel
        return -sign(self.w * lift + self.d * x + self.e * y + self.f)

    @property
    def center(self) -> Tuple[Fraction, Fraction]:
        return (Fraction(-self.d, 2 * self.w), Fraction(-self.e, 2 * self.w))

    @property
    def radius_squared(self) -> Fraction:
        return Fraction(self.d * self.d + self.e * self.e - 4 * self.w * self.f,
                        4 * self.w * self.w)

    @property
    def key(self) -> Tuple[Fraction, Fraction, Fraction]:
        """Exact identity of the circle: (center x, center y, radius squared)"""
        cx, cy = self.center
        return (cx, cy, self.radius_squared)


class GPKind(Enum):
    GENERAL_POSITION = "GENERAL_POSITION"
    COLLINEAR_TRIPLE = "COLLINEAR_TRIPLE"
    CONCYCLIC_QUADRUPLE = "CONCYCLIC_QUADRUPLE"


@dataclass(frozen=True)
class GPStatus:
    """Outcome of a general-position check: the first violation, if any"""
    kind: GPKind
    indices: Tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.kind is GPKind.GENERAL_POSITION

    def __str__(self) -> str:
        if self.ok:
            return self.kind.value
        return f"{self.kind.value}({','.join(str(i) for i in self.indices)})"


GENERAL_POSITION = GPStatus(GPKind.GENERAL_POSITION)


def _check_distinct(points: Sequence[Point]):
    seen = {}
    for index, p in enumerate(points):
        if p in seen:
            raise DuplicatePoint(seen[p], index)
        seen[p] = index


def find_collinear_triple(points: Sequence[Point]) -> Optional[Tuple[int, int, int]]:
    """Lexicographically smallest collinear index triple, or None"""
    for triple in combinations(range(len(points)), 3):
        i, j, k = triple
        if orientation(points[i], points[j], points[k]) == 0:
            return triple
    return None


def find_concyclic_quadruples(points: Sequence[Point],
                              stop_before: Optional[Tuple[int, ...]] = None) -> Iterable[Tuple[int, int, int, int]]:
    """
    Yield concyclic index quadruples in lexicographic order

    Quadruples containing a collinear triple are never concyclic and are
    skipped. Iteration stops at the first quadruple that would not sort
    before `stop_before`.
    """
    circles = {}
    for quad in combinations(range(len(points)), 4):
        if stop_before is not None and quad[:3] >= stop_before:
            return
        i, j, k, l = quad
        triple = (i, j, k)
        if triple not in circles:
            try:
                circles[triple] = Circle.through(points[i], points[j], points[k])
            except DegenerateCircle:
                circles[triple] = None
        circle = circles[triple]
        if circle is not None and circle.side(points[l]) == 0:
            yield quad


def validate_general_position(points: Sequence[Point]) -> GPStatus:
    """
    Check that no three points are collinear and no four are concyclic

    Args:
        points: Ordered points (a PointSet or any sequence of Point)

    Returns:
        GENERAL_POSITION, or the lexicographically smallest violating tuple

    Raises:
        DuplicatePoint: if two points coincide
    """
    points = list(points)
    _check_distinct(points)

    collinear = find_collinear_triple(points)
    concyclic = next(iter(find_concyclic_quadruples(points, stop_before=collinear)), None)

    if concyclic is not None:
        return GPStatus(GPKind.CONCYCLIC_QUADRUPLE, concyclic)
    if collinear is not None:
        return GPStatus(GPKind.COLLINEAR_TRIPLE, collinear)
    return GENERAL_POSITION


class PointSet(SequenceABC):
    """
    Ordered set of distinct rational points

    The general-position status is computed on first access and cached;
    instances are immutable.
    """

    def __init__(self, points: Iterable[Point]):
        self._points: Tuple[Point, ...] = tuple(points)
        _check_distinct(self._points)

    def __getitem__(self, index):
        return self._points[index]

    def __len__(self) -> int:
        return len(self._points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return self._points == other._points

    def __hash__(self) -> int:
        return hash(self._points)

    def __repr__(self) -> str:
        return f"PointSet({list(self._points)!r})"

    @property
    def points(self) -> Tuple[Point, ...]:
        return self._points

    @cached_property
    def gp_status(self) -> GPStatus:
        return validate_general_position(self._points)

    @property
    def n(self) -> Optional[int]:
        """n for a set of 2n+1 points; None when the size is even"""
        if len(self._points) % 2 == 0:
            return None
        return (len(self._points) - 1) // 2

    def replaced(self, index: int, point: Point) -> 'PointSet':
        """Copy with one point substituted"""
        points = list(self._points)
        points[index] = point
        return PointSet(points)

    def subset(self, indices: Iterable[int]) -> 'PointSet':
        return PointSet(self._points[i] for i in indices)


def parse_point_text(text: str) -> PointSet:
    """
    Parse the point-set text format

    One point per line as 'x y' with each coordinate 'num/den' or an
    integer; blank lines and '#' comment lines are ignored. Point indices
    follow line order among the remaining lines.
    """
    points: List[Point] = []
    line_numbers: List[int] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise PointFormatError(line_number, f"expected 2 coordinates, got {len(fields)}")
        try:
            x, y = [Fraction(token) for token in fields]
        except (ValueError, ZeroDivisionError) as e:
            raise PointFormatError(line_number, f"bad coordinate in {line!r}: {e}") from e
        points.append(Point(x, y))
        line_numbers.append(line_number)

    try:
        return PointSet(points)
    except DuplicatePoint as e:
        first, second = e.indices
        raise PointFormatError(
            line_numbers[second], f"duplicate of the point on line {line_numbers[first]}"
        ) from e


def format_point_text(points: Iterable[Point], header: Sequence[str] = ()) -> str:
    """Render points in the text format, optional '#' header lines first"""
    lines = [f"# {line}" for line in header]
    lines.extend(f"{format_rational(p.x)} {format_rational(p.y)}" for p in points)
    return "\n".join(lines) + "\n"


def read_point_file(path: Union[str, Path]) -> PointSet:
    """Read a UTF-8 point-set file"""
    text = Path(path).read_text(encoding='utf-8')
    points = parse_point_text(text)
    logger.debug(f"Read {len(points)} points from {path}")
    return points


def write_point_file(path: Union[str, Path], points: Iterable[Point], header: Sequence[str] = ()):
    """Write a UTF-8 point-set file"""
    Path(path).write_text(format_point_text(points, header), encoding='utf-8')
    logger.info(f"Wrote point file {path}")
