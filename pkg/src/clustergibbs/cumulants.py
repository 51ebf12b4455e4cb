"""Joint cumulants (semi-invariants) under the product measure P_0.

The joint cumulant of V_1..V_n is computed from the set-partition formula

    k(V_1, ..., V_n) = sum over partitions pi of {1..n} of
                       (-1)^(|pi|-1) (|pi|-1)! prod_{b in pi} E[prod_{i in b} V_i]

with every block moment computed exactly by summing over the local
configuration space. Observables whose supports do not overlap are
independent under P_0, so a moment factorizes over overlap components.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ResourceGuardError
from .lattice import Point
from .model import InteractionModel, Observable

MAX_LENGTH = 10
MAX_MOMENT_SITES = 22


@lru_cache(maxsize=None)
def set_partitions(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All partitions of range(n) as tuples of blocks, via restricted-growth strings."""
    if n == 0:
        return ((),)
    out = []
    rgs = [0] * n

    def rec(i, m):
        if i == n:
            blocks = [[] for _ in range(m)]
            for idx, b in enumerate(rgs):
                blocks[b].append(idx)
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in range(m + 1):
            rgs[i] = b
            rec(i + 1, max(m, b + 1))

    rgs[0] = 0
    rec(1, 1)
    return tuple(out)


def _components(items: Sequence[Observable]) -> list[list[int]]:
    parent = list(range(len(items)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[Point, int] = {}
    for i, obs in enumerate(items):
        for t in obs.support:
            if t in owner:
                a, b = find(i), find(owner[t])
                if a != b:
                    parent[a] = b
            else:
                owner[t] = i
    groups: dict[int, list[int]] = {}
    for i in range(len(items)):
        groups.setdefault(find(i), []).append(i)
    return [groups[k] for k in sorted(groups)]


def _joint_moment(model: InteractionModel, items: Sequence[Observable]) -> float:
    sites = sorted({t for obs in items for t in obs.support})
    if len(sites) > MAX_MOMENT_SITES:
        raise ResourceGuardError(f"moment over {len(sites)} sites exceeds the guard")
    label = {t: i for i, t in enumerate(sites)}
    operands = []
    for t in sites:
        operands += [model.site(t).weights, [label[t]]]
    for obs in items:
        operands += [obs.table, [label[t] for t in obs.support]]
    return float(np.einsum(*operands, []))


def mixed_moment(model: InteractionModel, items: Sequence[Observable]) -> float:
    """<V_1 V_2 ... V_n>_0, exact, factorized over independent groups."""
    if not items:
        return 1.0
    out = 1.0
    for group in _components(items):
        out *= _joint_moment(model, [items[i] for i in group])
    return out


def _canonical_key(obs: Observable):
    table = np.ascontiguousarray(obs.table, dtype=np.float64)
    return (obs.support, table.shape, table.tobytes())


def semi_invariant(model: InteractionModel, items: Sequence[Observable]) -> float:
    """Joint cumulant <V_1, ..., V_n>_0; the mean when n == 1."""
    n = len(items)
    if n == 0:
        raise ValueError("semi-invariant needs at least one argument")
    if n > MAX_LENGTH:
        raise ResourceGuardError(f"{n} arguments exceed the partition guard ({MAX_LENGTH})")
    # Canonical argument order makes the float result exactly permutation invariant.
    items = sorted(items, key=_canonical_key)
    moments: dict[tuple[int, ...], float] = {}

    def m(block):
        if block not in moments:
            moments[block] = mixed_moment(model, [items[i] for i in block])
        return moments[block]

    terms = []
    for pi in set_partitions(n):
        k = len(pi)
        prod = 1.0
        for block in pi:
            prod *= m(block)
            if prod == 0.0:
                break
        terms.append((-1) ** (k - 1) * math.factorial(k - 1) * prod)
    return math.fsum(terms)


def semi_invariant_family(model: InteractionModel, Y: Observable,
                          entries: Sequence[tuple[Observable, int]]) -> float:
    """<Y, Phi_C1 (n1 times), ..., Phi_Ck (nk times)>_0."""
    items = [Y]
    for obs, mult in entries:
        items.extend([obs] * mult)
    return semi_invariant(model, items)


def is_connected_sequence(Q: Sequence[Point], sets: Sequence[Sequence[Point]]) -> bool:
    """Whether the intersection graph on (Q, B_1, ..., B_n) is connected."""
    nodes = [set(map(tuple, Q))] + [set(map(tuple, B)) for B in sets]
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(len(nodes)):
            if j not in seen and nodes[i] & nodes[j]:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(nodes)
