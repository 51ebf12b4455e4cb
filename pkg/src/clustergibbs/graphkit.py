"""Lattice graph machinery: set size, associated tree and tracks, interaction sets.

The size S(B) of a finite set B is the edge count of a minimum 1-connected
graph (connected, unit-length edges) whose vertices contain B, i.e. a
rectilinear Steiner tree on the grid. Every minimum graph lies inside the
bounding box of B: collapsing an outermost layer that holds no point of B
onto its neighbour layer removes at least one edge. All searches therefore
run on the bounding box.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import lattice
from .errors import InvalidInputError, ResourceGuardError
from .lattice import Point, Region
from .records import VerificationRecord

DEFAULT_BOX_BUDGET = 4096
DEFAULT_SUBSET_BUDGET = 2_000_000

Edge = tuple[Point, Point]


@dataclass(frozen=True)
class UnitGraph:
    vertices: Region
    edges: tuple[Edge, ...]

    def adjacency(self) -> dict[Point, list[Point]]:
        adj: dict[Point, list[Point]] = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for v in adj:
            adj[v].sort()
        return adj

    def is_unit(self) -> bool:
        return all(lattice.l1_distance(a, b) == 1 for a, b in self.edges)

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        adj = self.adjacency()
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def is_tree(self) -> bool:
        return self.is_connected() and len(self.edges) == len(self.vertices) - 1


def _normalize(B: Iterable[Sequence[int]]) -> tuple[Region, Point]:
    """Translate B so its bounding box starts at the origin; return (shape, shift)."""
    pts = lattice.region(B)
    if not pts:
        raise InvalidInputError("set must be nonempty")
    nu = len(pts[0])
    lo = tuple(min(p[i] for p in pts) for i in range(nu))
    shape = tuple(tuple(c - o for c, o in zip(p, lo)) for p in pts)
    return shape, lo


def _box_graph(pts: Region, margin: int, budget: int):
    box = lattice.bounding_box(pts, margin)
    if len(box) > budget:
        raise ResourceGuardError(
            f"bounding box has {len(box)} points, budget is {budget}"
        )
    index = {p: i for i, p in enumerate(box)}
    nbrs = [[index[q] for q in lattice.unit_neighbors(p) if q in index] for p in box]
    return box, index, nbrs


def _bfs_distances(nbrs: list[list[int]]) -> np.ndarray:
    n = len(nbrs)
    D = np.full((n, n), np.iinfo(np.int64).max // 4, dtype=np.int64)
    for s in range(n):
        D[s, s] = 0
        frontier = [s]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for w in nbrs[u]:
                    if D[s, w] > d:
                        D[s, w] = d
                        nxt.append(w)
            frontier = nxt
    return D


@lru_cache(maxsize=None)
def _steiner_size(shape: Region, margin: int, budget: int) -> int:
    box, index, nbrs = _box_graph(shape, margin, budget)
    D = _bfs_distances(nbrs)
    terms = [index[p] for p in shape]
    k = len(terms)
    # Dreyfus-Wagner over the box graph; dp[mask][v] = cheapest tree spanning mask + v.
    full = (1 << k) - 1
    dp = np.zeros((1 << k, len(box)), dtype=np.int64)
    for i, t in enumerate(terms):
        dp[1 << i] = D[t]
    for mask in range(1, full + 1):
        if mask & (mask - 1) == 0:
            continue
        best = np.full(len(box), np.iinfo(np.int64).max // 4, dtype=np.int64)
        sub = (mask - 1) & mask
        while sub:
            if sub & (mask & -mask):
                best = np.minimum(best, dp[sub] + dp[mask ^ sub])
            sub = (sub - 1) & mask
        dp[mask] = (best[:, None] + D).min(axis=0)
    return int(dp[full].min())


def size_of(B: Iterable[Sequence[int]], *, margin: int = 0,
            budget: int = DEFAULT_BOX_BUDGET) -> int:
    """S(B): edges of a minimum 1-connected lattice graph containing B.

    A single point has size 0 (one vertex, no edges).
    """
    shape, _ = _normalize(B)
    if len(shape) == 1:
        return 0
    return _steiner_size(shape, margin, budget)


def _lexmin_spanning_tree(vertices: Sequence[Point]) -> tuple[Edge, ...] | None:
    """Kruskal on lexicographically sorted unit edges; None if not connected.

    Greedy on a graphic matroid yields the lexicographically least basis, so
    this is the least sorted edge list among spanning trees of `vertices`.
    """
    vset = set(vertices)
    edges = sorted(
        (p, q) for p in vertices for q in lattice.unit_neighbors(p) if q in vset and p < q
    )
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    chosen = []
    for p, q in edges:
        a, b = find(p), find(q)
        if a != b:
            parent[a] = b
            chosen.append((p, q))
    if len(chosen) != len(vertices) - 1:
        return None
    return tuple(chosen)


@lru_cache(maxsize=None)
def _associated_graph_shape(shape: Region, margin: int, budget: int) -> UnitGraph:
    m = _steiner_size(shape, margin, DEFAULT_BOX_BUDGET)
    box = lattice.bounding_box(shape, margin)
    bset = set(shape)
    extra_pool = [p for p in box if p not in bset]
    n_extra = m + 1 - len(shape)
    if math.comb(len(extra_pool), n_extra) > budget:
        raise ResourceGuardError(
            f"associated graph search needs C({len(extra_pool)},{n_extra}) candidates"
        )
    best = None
    for extra in itertools.combinations(extra_pool, n_extra):
        verts = tuple(sorted(bset.union(extra)))
        tree = _lexmin_spanning_tree(verts)
        if tree is not None and (best is None or tree < best[1]):
            best = (verts, tree)
    assert best is not None, "minimal tree must exist inside the bounding box"
    return UnitGraph(vertices=best[0], edges=best[1])


def associated_graph(B: Iterable[Sequence[int]], *, margin: int = 0,
                     budget: int = DEFAULT_SUBSET_BUDGET) -> UnitGraph:
    """G_B: the lexicographically first minimum 1-connected graph containing B.

    Graphs are compared by their sorted edge lists, each edge stored with its
    endpoints in lexicographic order.
    """
    shape, shift = _normalize(B)
    if len(shape) == 1:
        return UnitGraph(vertices=lattice.region([tuple(shift)]), edges=())
    g = _associated_graph_shape(shape, margin, budget)
    # Translation preserves lexicographic order, so the canonical graph translates too.
    mv = lambda p: tuple(a + b for a, b in zip(p, shift))  # noqa: E731
    return UnitGraph(
        vertices=tuple(mv(v) for v in g.vertices),
        edges=tuple((mv(a), mv(b)) for a, b in g.edges),
    )


def _doubled_tree_circuit(graph: UnitGraph, start: Point) -> tuple[Point, ...]:
    # With every edge doubled, an Euler circuit must finish a subtree before
    # stepping back to its parent, so circuits are depth-first walks and the
    # least vertex sequence takes the smallest unvisited neighbour each time.
    adj = graph.adjacency()
    walk = [start]

    def visit(v, parent):
        for w in adj[v]:
            if w != parent:
                walk.append(w)
                visit(w, v)
                walk.append(v)

    visit(start, None)
    return tuple(walk)


def associated_track(B: Iterable[Sequence[int]], start: Point | None = None) -> tuple[Point, ...]:
    """tr_B: least Euler circuit of the edge-doubled associated graph.

    Starts at the smallest vertex of G_B unless `start` pins it; the track has
    2*S(B) steps.
    """
    g = associated_graph(B)
    if start is None:
        start = g.vertices[0]
    start = tuple(start)
    if start not in g.vertices:
        raise InvalidInputError(f"start {start} is not a vertex of the associated graph")
    return _doubled_tree_circuit(g, start)


def extended_track(B: Iterable[Sequence[int]], r: int,
                   start: Point | None = None) -> tuple[Point, ...]:
    """tr'_B: associated track padded to 2r steps by a +e1 run then a -e1 run."""
    pts = lattice.region(B)
    if len(pts) < 2:
        raise InvalidInputError("extended track needs a set with at least two points")
    m = size_of(pts)
    if m > r:
        raise InvalidInputError(f"S(B) = {m} exceeds r = {r}")
    track = list(associated_track(pts, start))
    for direction in [1] * (r - m) + [-1] * (r - m):
        last = list(track[-1])
        last[0] += direction
        track.append(tuple(last))
    return tuple(track)


def is_track(seq: Sequence[Point]) -> bool:
    return (
        len(seq) >= 1
        and seq[0] == seq[-1]
        and all(lattice.l1_distance(a, b) == 1 for a, b in zip(seq, seq[1:]))
    )


def in_interaction_family(B: Iterable[Sequence[int]], r: int) -> bool:
    """Membership of B in the collection of sets with 1 <= S(B) <= r."""
    return 1 <= size_of(B) <= r


@lru_cache(maxsize=None)
def _sets_at_origin(nu: int, r: int, budget: int) -> tuple[Region, ...]:
    o = lattice.origin(nu)
    others = [p for p in lattice.ball(o, r) if p != o]
    total = sum(math.comb(len(others), k) for k in range(1, r + 1))
    if total > budget:
        raise ResourceGuardError(f"{total} candidate sets exceed budget {budget}")
    found = []
    for k in range(1, r + 1):
        for extra in itertools.combinations(others, k):
            C = lattice.region((o,) + extra)
            if size_of(C) <= r:
                found.append(C)
    return tuple(sorted(found))


def enumerate_sets_containing(t0: Sequence[int], r: int, *,
                              budget: int = DEFAULT_SUBSET_BUDGET) -> list[Region]:
    """All interaction sets (1 <= S <= r) containing t0, sorted.

    Every such set lies in the L1 ball of radius r around t0 and has at most
    r + 1 points, so subsets of that ball are an exhaustive candidate pool.
    """
    if r < 1:
        raise InvalidInputError("r must be >= 1")
    t0 = lattice.point(t0)
    return [lattice.translate(C, t0) for C in _sets_at_origin(len(t0), int(r), budget)]


def l_factor(B: Iterable[Sequence[int]], r: int) -> int:
    """l(B): number of interaction sets that intersect B."""
    pts = lattice.region(B)
    if not in_interaction_family(pts, r):
        raise InvalidInputError("l_factor needs B with 1 <= S(B) <= r")
    hits = set()
    for t in pts:
        hits.update(enumerate_sets_containing(t, r))
    return len(hits)


@lru_cache(maxsize=None)
def l_max(nu: int, r: int) -> int:
    """L = max l(B); every translation class has a member through the origin."""
    if nu < 1 or r < 1:
        raise InvalidInputError("l_max needs nu >= 1 and r >= 1")
    return max(l_factor(C, r) for C in enumerate_sets_containing(lattice.origin(nu), r))


def lambda0(nu: int, r: int) -> Fraction:
    """Certified high-temperature threshold 1 / (50 L (8 nu)^(2r)), exact."""
    return Fraction(1, 50 * l_max(nu, r) * (8 * nu) ** (2 * r))


def count_tracks(nu: int, n: int, t0: Sequence[int] | None = None) -> int:
    """Exhaustively count closed unit walks (t0, ..., t_n) with t_n = t0."""
    steps = []
    for i in range(nu):
        for s in (-1, 1):
            e = [0] * nu
            e[i] = s
            steps.append(tuple(e))
    if (2 * nu) ** n > DEFAULT_SUBSET_BUDGET * 10:
        raise ResourceGuardError(f"(2*{nu})^{n} walks exceed the enumeration budget")
    count = 0
    for walk in itertools.product(steps, repeat=n):
        if all(sum(col) == 0 for col in zip(*walk)):
            count += 1
    return count


def verify_track_count(nu: int, n: int, t0: Sequence[int] | None = None) -> VerificationRecord:
    if n <= 1:
        raise InvalidInputError("track count lemma needs n > 1")
    count = count_tracks(nu, n, t0)
    bound = (2 * nu) ** (n - 1)
    return VerificationRecord("track_count", {"nu": nu, "n": n}, count, bound, count <= bound)


def verify_sets_per_track(nu: int, r: int) -> VerificationRecord:
    """Max number of sets C through t0 sharing one extended track, vs 2^(2r-1)."""
    t0 = lattice.origin(nu)
    tracks = Counter()
    for C in enumerate_sets_containing(t0, r):
        tr = extended_track(C, r, start=t0)
        if not (is_track(tr) and len(tr) == 2 * r + 1):
            return VerificationRecord("sets_per_track", {"nu": nu, "r": r}, -1, 0, False)
        tracks[tr] += 1
    worst = max(tracks.values())
    bound = 2 ** (2 * r - 1)
    return VerificationRecord("sets_per_track", {"nu": nu, "r": r}, worst, bound, worst <= bound)


def verify_sets_per_point(nu: int, r: int) -> VerificationRecord:
    count = len(enumerate_sets_containing(lattice.origin(nu), r))
    bound = (4 * nu) ** (2 * r - 1)
    return VerificationRecord("sets_per_point", {"nu": nu, "r": r}, count, bound, count <= bound)


def verify_l_bound(nu: int, r: int) -> VerificationRecord:
    L = l_max(nu, r)
    bound = (4 * nu) ** (2 * r - 1) * (r + 1)
    return VerificationRecord("L_bound", {"nu": nu, "r": r}, L, bound, L <= bound)
