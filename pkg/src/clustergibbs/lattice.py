"""Integer lattice geometry.

Points are plain tuples of ints and regions are tuples of distinct points kept
in lexicographic order. Lexicographic order on coordinate tuples is the single
total order every "first in order" choice downstream relies on.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Sequence

from .errors import InvalidInputError

Point = tuple[int, ...]
Region = tuple[Point, ...]


def point(coords: Iterable[int]) -> Point:
    p = tuple(int(c) for c in coords)
    if not p:
        raise InvalidInputError("a lattice point needs at least one coordinate")
    return p


def region(points: Iterable[Iterable[int]]) -> Region:
    """Canonical region: distinct points of one dimension, sorted."""
    pts = sorted({point(p) for p in points})
    if pts and len({len(p) for p in pts}) != 1:
        raise InvalidInputError("points in a region must share one dimension")
    return tuple(pts)


def dimension(pts: Sequence[Point]) -> int:
    if not pts:
        raise InvalidInputError("empty region has no dimension")
    return len(pts[0])


def l1_distance(s: Point, t: Point) -> int:
    if len(s) != len(t):
        raise InvalidInputError(f"dimension mismatch: {len(s)} vs {len(t)}")
    return sum(abs(a - b) for a, b in zip(s, t))


def origin(nu: int) -> Point:
    return (0,) * nu


def cube(N: int, nu: int) -> Region:
    """All points with |t_i| <= N, in lexicographic order; (2N+1)**nu of them."""
    if N < 0 or nu < 1:
        raise InvalidInputError("cube needs N >= 0 and nu >= 1")
    side = range(-N, N + 1)
    return tuple(itertools.product(side, repeat=nu))


def in_cube(t: Point, N: int) -> bool:
    return all(abs(c) <= N for c in t)


def distance_to_origin(Q: Sequence[Point]) -> int:
    if not Q:
        raise InvalidInputError("distance_to_origin of an empty region")
    nu = len(Q[0])
    o = origin(nu)
    return min(l1_distance(t, o) for t in Q)


def translate(pts: Iterable[Point], shift: Point) -> Region:
    return region(tuple(a + b for a, b in zip(p, shift)) for p in pts)


def unit_neighbors(t: Point) -> list[Point]:
    """The 2*nu lattice neighbours of t, in lexicographic order."""
    out = []
    for i in range(len(t)):
        for step in (-1, 1):
            q = list(t)
            q[i] += step
            out.append(tuple(q))
    return sorted(out)


def ball(center: Point, radius: int) -> Region:
    """Points within L1 distance `radius` of center."""
    nu = len(center)
    offsets = itertools.product(range(-radius, radius + 1), repeat=nu)
    return tuple(
        tuple(c + o for c, o in zip(center, off))
        for off in offsets
        if sum(abs(o) for o in off) <= radius
    )


def bounding_box(pts: Sequence[Point], margin: int = 0) -> Region:
    nu = dimension(pts)
    lo = [min(p[i] for p in pts) - margin for i in range(nu)]
    hi = [max(p[i] for p in pts) + margin for i in range(nu)]
    return tuple(itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))))
