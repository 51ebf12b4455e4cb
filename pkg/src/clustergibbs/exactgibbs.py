"""Brute-force finite-volume Gibbs probabilities.

Every configuration on the cube is enumerated in odometer order (last site
fastest) over the lexicographically sorted sites, in fixed-size blocks. Each
block's weighted sums are correctly rounded with math.fsum, and block sums are
combined with fsum in block order, so results do not depend on thread count.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from . import lattice
from .errors import InvalidInputError, ResourceGuardError
from .lattice import Point
from .model import CylinderEvent, InteractionModel, Observable
from .parallel import ordered_map

DEFAULT_BUDGET = 2 ** 24
BLOCK = 2 ** 15


def gibbs_modify(p0: Sequence[float], energy: Sequence[float], values: Sequence[float]) -> float:
    """<Y e^U>_P / <e^U>_P over a finite outcome list with probabilities p0."""
    w = np.asarray(p0, dtype=np.float64) * np.exp(np.asarray(energy, dtype=np.float64))
    return math.fsum(w * np.asarray(values, dtype=np.float64)) / math.fsum(w)


def interaction_energy(model: InteractionModel, region: Sequence[Point],
                       omega: Mapping[Point, float]) -> float:
    """U_region(omega): sum of potential terms on sets inside region."""
    pts = lattice.region(region)
    missing = [t for t in pts if t not in omega]
    if missing:
        raise InvalidInputError(f"configuration misses sites {missing}")
    total = []
    for term in model.terms_within(pts):
        idx = tuple(model.site(t).index(omega[t]) for t in term.support)
        total.append(float(term.table[idx]))
    return math.fsum(total)


class _Window:
    """Configuration space of one finite region, with vectorized term evaluation."""

    def __init__(self, model: InteractionModel, sites, budget: int):
        self.sites = lattice.region(sites)
        self.pos = {t: i for i, t in enumerate(self.sites)}
        self.dists = [model.site(t) for t in self.sites]
        self.radices = tuple(len(d.support) for d in self.dists)
        self.total = math.prod(self.radices)
        if self.total > budget:
            raise ResourceGuardError(
                f"{self.total} configurations on {len(self.sites)} sites exceed budget "
                f"{budget}; use a smaller N"
            )
        with np.errstate(divide="ignore"):
            self.logp = [np.log(d.weights) for d in self.dists]
        self.terms = model.terms_within(self.sites)

    def digits(self, start: int, stop: int):
        return np.unravel_index(np.arange(start, stop, dtype=np.int64), self.radices)

    def lookup(self, obs: Observable, digits) -> np.ndarray:
        return obs.table[tuple(digits[self.pos[t]] for t in obs.support)]

    def log_weights(self, digits) -> np.ndarray:
        acc = np.zeros(len(digits[0]) if digits else 1)
        for lp, d in zip(self.logp, digits):
            acc = acc + lp[d]
        for term in self.terms:
            acc = acc + self.lookup(term, digits)
        return acc


def _blocks(total: int):
    return [(a, min(a + BLOCK, total)) for a in range(0, total, BLOCK)]


def gibbs_expectation(model: InteractionModel, N: int, Y: Observable, *,
                      budget: int = DEFAULT_BUDGET, threads: int | None = None) -> float:
    """<Y>_{P_N}: expectation of Y under the Gibbs modification of P_0 by U_N."""
    nu = model.nu
    if any(not lattice.in_cube(t, N) for t in Y.support):
        raise InvalidInputError(f"support of Y is not inside the cube of half-width {N}")
    win = _Window(model, lattice.cube(N, nu), budget)

    def block(bounds):
        digits = win.digits(*bounds)
        w = np.exp(win.log_weights(digits))
        return math.fsum(w * win.lookup(Y, digits)), math.fsum(w)

    parts = ordered_map(block, _blocks(win.total), threads)
    num = math.fsum(p[0] for p in parts)
    den = math.fsum(p[1] for p in parts)
    return num / den


def gibbs_probability(model: InteractionModel, N: int, A: CylinderEvent, *,
                      budget: int = DEFAULT_BUDGET, threads: int | None = None) -> float:
    """P_N(A) by exact enumeration of all configurations on the cube of half-width N."""
    if any(not lattice.in_cube(t, N) for t in A.base):
        raise InvalidInputError(f"event base is not inside the cube of half-width {N}")
    return gibbs_expectation(model, N, A.indicator(model), budget=budget, threads=threads)
