"""Shared fixtures for the splitcircle test suite"""

from fractions import Fraction

import pytest

from exact_geometry import Point, PointSet, format_point_text
from generators import generate_random_general_position

CORPUS_SIZES = range(1, 9)
CORPUS_SEEDS = range(25)


def make_points(*coords) -> PointSet:
    """PointSet from (x, y) pairs given as ints, Fractions or 'num/den' strings"""
    return PointSet(Point(Fraction(x), Fraction(y)) for x, y in coords)


@pytest.fixture(scope='session')
def corpus():
    """25 seeded random general-position sets for every n in 1..8, keyed by (n, seed)"""
    return {
        (n, seed): generate_random_general_position(2 * n + 1, seed, 1000)
        for n in CORPUS_SIZES
        for seed in CORPUS_SEEDS
    }


@pytest.fixture
def line_crossing_set():
    """Moving point 0 just above segment 1-2; two far points overhead"""
    return make_points((5, '1/10'), (0, 0), (10, 0), (3, 100), (7, 101))


@pytest.fixture
def chord_set():
    """
    Moving point 0 left of the circle of radius 5 through points 1, 2, 3

    Moving it to (10, 1) passes through that circle twice.
    """
    return make_points((-10, 1), (-5, 0), (5, 0), (0, 5), (0, -30))


@pytest.fixture
def cap_set():
    """
    Moving point 0 level with a thin cap of the circle of radius 5 through 1, 2, 3

    Moving it to (10, 9/2) cuts through that cap, entering and leaving at
    irrational parameters with no other boundary crossed in between.
    """
    return make_points((-10, '9/2'), (-5, 0), (5, 0), (0, -5), (-30, -6))


@pytest.fixture
def point_file(tmp_path):
    """Write a point set to a file and return its path"""
    def write(points, name='points.txt', header=()):
        path = tmp_path / name
        path.write_text(format_point_text(points, header), encoding='utf-8')
        return str(path)
    return write
