"""Interaction models: site distributions, bounded potentials, cylinder events.

Spins take finitely many real values per site. Random variables that depend
on finitely many sites are stored as an `Observable`: a sorted support region
plus a numpy table with one axis per support site, indexed by the position of
each site's value in its distribution's support.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import graphkit, lattice
from .errors import InvalidInputError
from .lattice import Point, Region

PROB_TOL = 1e-12


@dataclass(frozen=True)
class SiteDistribution:
    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise InvalidInputError("support and probabilities must be nonempty and match")
        if len(set(self.support)) != len(self.support):
            raise InvalidInputError("support values must be distinct")
        if any(p < 0 for p in self.probs):
            raise InvalidInputError("probabilities must be nonnegative")
        if abs(math.fsum(self.probs) - 1.0) > PROB_TOL:
            raise InvalidInputError("probabilities must sum to 1")

    @classmethod
    def make(cls, support: Iterable[float], probs: Iterable[float]) -> "SiteDistribution":
        return cls(tuple(float(v) for v in support), tuple(float(p) for p in probs))

    def index(self, value: float) -> int:
        try:
            return self.support.index(float(value))
        except ValueError:
            raise InvalidInputError(f"value {value} not in support {self.support}") from None

    def prob_of(self, allowed: Iterable[float] | None) -> float:
        if allowed is None:
            return 1.0
        allowed = set(float(v) for v in allowed)
        return math.fsum(p for v, p in zip(self.support, self.probs) if v in allowed)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.support, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Observable:
    """A random variable depending on the sites in `support` only."""

    support: Region
    table: np.ndarray

    def scaled(self, c: float) -> "Observable":
        return Observable(self.support, self.table * c)


@dataclass(frozen=True, eq=False)
class InteractionModel:
    """Lattice model with radius r, strength lam, initial site laws and a potential.

    `rules` hold translation-invariant terms: each is a shape (sorted points,
    first point at the origin) with one table reused at every translate.
    `explicit` holds terms attached to fixed sets.
    """

    nu: int
    r: int
    lam: float
    default_site: SiteDistribution
    site_overrides: Mapping[Point, SiteDistribution] = field(default_factory=dict)
    rules: tuple[tuple[Region, np.ndarray], ...] = ()
    explicit: Mapping[Region, np.ndarray] = field(default_factory=dict)
    name: str = "custom"

    def __post_init__(self):
        if self.nu < 1 or self.r < 1 or self.lam < 0:
            raise InvalidInputError("need nu >= 1, r >= 1, lambda >= 0")
        for shape, table in self.rules:
            self._check_term(shape, table, translate=True)
        for B, table in self.explicit.items():
            self._check_term(B, table, translate=False)

    def _check_term(self, B: Region, table: np.ndarray, translate: bool) -> None:
        if any(len(p) != self.nu for p in B):
            raise InvalidInputError(f"term {B} has wrong dimension")
        s = graphkit.size_of(B)
        if not 1 <= s <= self.r:
            raise InvalidInputError(f"term set {list(B)} has size {s}, outside [1, {self.r}]")
        if table.size and np.max(np.abs(table)) > self.lam:
            raise InvalidInputError(
                f"potential on {list(B)} reaches {np.max(np.abs(table))} > lambda = {self.lam}"
            )
        if not translate:
            expect = tuple(len(self.site(t).support) for t in B)
            if table.shape != expect:
                raise InvalidInputError(f"table for {list(B)} has shape {table.shape}, expected {expect}")
        elif table.ndim != len(B):
            raise InvalidInputError(f"rule table for {list(B)} has wrong rank")

    def site(self, t: Point) -> SiteDistribution:
        if len(t) != self.nu:
            raise InvalidInputError(f"site {tuple(t)} is not a point of Z^{self.nu}")
        return self.site_overrides.get(tuple(t), self.default_site)

    def term(self, B: Region) -> Observable | None:
        """Total potential attached to the set B (rules plus explicit), or None."""
        B = lattice.region(B)
        tables = []
        if B in self.explicit:
            tables.append(self.explicit[B])
        if self.rules:
            shift = B[0]
            shape = tuple(tuple(a - b for a, b in zip(p, shift)) for p in B)
            for rule_shape, table in self.rules:
                if rule_shape == shape:
                    tables.append(table)
        if not tables:
            return None
        expect = tuple(len(self.site(t).support) for t in B)
        for t in tables:
            if t.shape != expect:
                raise InvalidInputError(f"rule table does not fit the supports at {list(B)}")
        return Observable(B, np.sum(tables, axis=0) if len(tables) > 1 else tables[0])

    def active_sets_containing(self, t: Point) -> list[Region]:
        """Sets carrying a potential term that contain t, sorted."""
        t = tuple(t)
        found = {B for B in self.explicit if t in B}
        for shape, _ in self.rules:
            for p in shape:
                shift = tuple(a - b for a, b in zip(t, p))
                found.add(lattice.translate(shape, shift))
        return sorted(found)

    def terms_within(self, region: Iterable[Point]) -> list[Observable]:
        """All potential terms whose set lies inside region, sorted by set."""
        pts = set(lattice.region(region))
        sets = set()
        for t in pts:
            for B in self.active_sets_containing(t):
                if pts.issuperset(B):
                    sets.add(B)
        return [self.term(B) for B in sorted(sets)]

    def with_lambda(self, lam: float) -> "InteractionModel":
        """Same model with every potential table rescaled to strength lam."""
        if self.lam == 0:
            raise InvalidInputError("cannot rescale a model built with lambda = 0")
        c = lam / self.lam
        return InteractionModel(
            self.nu, self.r, lam, self.default_site, dict(self.site_overrides),
            tuple((s, t * c) for s, t in self.rules),
            {B: t * c for B, t in self.explicit.items()}, self.name,
        )


def _unit_shapes(nu: int) -> list[Region]:
    o = lattice.origin(nu)
    shapes = []
    for i in range(nu):
        e = [0] * nu
        e[i] = 1
        shapes.append((o, tuple(e)))
    return shapes


def _couplings(K, nu: int) -> list[float]:
    Ks = [float(K)] * nu if np.isscalar(K) else [float(k) for k in K]
    if len(Ks) != nu:
        raise InvalidInputError(f"need one coupling per lattice direction ({nu})")
    if any(abs(k) > 1 for k in Ks):
        raise InvalidInputError("couplings must satisfy |K| <= 1")
    return Ks


def build_potts(nu: int, lam: float, q: int, K=1.0) -> InteractionModel:
    """Potts model: colours 1..q uniform, pair energy lam*K*delta on unit pairs.

    K is one coupling per lattice direction (or a scalar for all directions).
    """
    if q < 2:
        raise InvalidInputError("Potts model needs q >= 2")
    Ks = _couplings(K, nu)
    site = SiteDistribution.make(range(1, q + 1), [1.0 / q] * q)
    rules = tuple((shape, lam * k * np.eye(q)) for shape, k in zip(_unit_shapes(nu), Ks))
    return InteractionModel(nu, 1, lam, site, {}, rules, {}, name="potts")


def ising_site(h: float) -> SiteDistribution:
    """Spin law on {-1, +1} with the external field h absorbed: P(x) ~ exp(-x h)."""
    z = math.exp(h) + math.exp(-h)
    return SiteDistribution.make((-1.0, 1.0), (math.exp(h) / z, math.exp(-h) / z))


def field_for(p_plus: float) -> float:
    """The field h giving P(+1) = p_plus."""
    return 0.5 * math.log((1.0 - p_plus) / p_plus)


def build_ising(nu: int, lam: float, K=1.0, h: float | Mapping[Point, float] = 0.0,
                default_h: float = 0.0) -> InteractionModel:
    """Ising model with pair energy lam*K*w(s)*w(t) on unit pairs.

    `h` is either a uniform field or a map site -> field (others get default_h).
    """
    Ks = _couplings(K, nu)
    spins = np.array([-1.0, 1.0])
    outer = np.outer(spins, spins)
    rules = tuple((shape, lam * k * outer) for shape, k in zip(_unit_shapes(nu), Ks))
    if isinstance(h, Mapping):
        default = ising_site(default_h)
        overrides = {lattice.point(t): ising_site(v) for t, v in h.items()}
    else:
        default = ising_site(float(h))
        overrides = {}
    return InteractionModel(nu, 1, lam, default, overrides, rules, {}, name="ising")


def build_custom(nu: int, r: int, lam: float, site: SiteDistribution,
                 terms: Sequence[tuple[Iterable[Point], np.ndarray, bool]] = (),
                 site_overrides: Mapping[Point, SiteDistribution] | None = None) -> InteractionModel:
    """General model; each term is (points, table, translate)."""
    rules, explicit = [], {}
    for pts, table, translate in terms:
        B = lattice.region(pts)
        table = np.asarray(table, dtype=np.float64)
        if translate:
            shape = lattice.translate(B, tuple(-c for c in B[0]))
            rules.append((shape, table))
        else:
            explicit[B] = explicit.get(B, 0) + table
    return InteractionModel(nu, r, lam, site, dict(site_overrides or {}), tuple(rules), explicit)


# --- cylinder events -------------------------------------------------------

Clause = tuple[tuple[Point, frozenset], ...]


@dataclass(frozen=True)
class CylinderEvent:
    """Event on the sites of `base`, as a union of conjunctions of site constraints.

    A clause with no constraints is the whole space; no clauses is the empty event.
    """

    base: Region
    clauses: tuple[Clause, ...]

    @classmethod
    def make(cls, base: Iterable[Point],
             clauses: Iterable[Mapping[Point, Iterable[float]]]) -> "CylinderEvent":
        base = lattice.region(base)
        if not base:
            raise InvalidInputError("event base must be nonempty")
        bset = set(base)
        canon = []
        for clause in clauses:
            items = []
            for site, allowed in clause.items():
                site = lattice.point(site)
                if site not in bset:
                    raise InvalidInputError(f"clause site {site} not in base")
                allowed = frozenset(float(v) for v in allowed)
                if not allowed:
                    raise InvalidInputError("allowed value sets must be nonempty")
                items.append((site, allowed))
            canon.append(tuple(sorted(items, key=lambda kv: kv[0])))
        return cls(base, tuple(sorted(set(canon), key=_clause_key)))

    def with_base(self, base: Iterable[Point]) -> "CylinderEvent":
        """Same event on a larger base (new sites unconstrained)."""
        new = lattice.region(base)
        if not set(self.base) <= set(new):
            raise InvalidInputError("new base must contain the old one")
        return CylinderEvent(new, self.clauses)

    def indicator(self, model: InteractionModel) -> Observable:
        dists = [model.site(t) for t in self.base]
        shape = tuple(len(d.support) for d in dists)
        ind = np.zeros(shape, dtype=bool)
        pos = {t: i for i, t in enumerate(self.base)}
        for clause in self.clauses:
            mask = np.ones(shape, dtype=bool)
            for site, allowed in clause:
                i = pos[site]
                ok = np.array([v in allowed for v in dists[i].support])
                view = [1] * len(shape)
                view[i] = shape[i]
                mask &= ok.reshape(view)
            ind |= mask
        return Observable(self.base, ind.astype(np.float64))


def _clause_key(clause: Clause):
    return tuple((site, tuple(sorted(allowed))) for site, allowed in clause)


def _intersect(clauses: Sequence[Clause]) -> dict[Point, frozenset] | None:
    merged: dict[Point, frozenset] = {}
    for clause in clauses:
        for site, allowed in clause:
            merged[site] = merged[site] & allowed if site in merged else allowed
            if not merged[site]:
                return None
    return merged


def event_probability_p0(model: InteractionModel, A: CylinderEvent) -> float:
    """P_0(A) by inclusion-exclusion over clauses, factorizing over sites."""
    terms = []
    for k in range(1, len(A.clauses) + 1):
        sign = 1.0 if k % 2 else -1.0
        for combo in itertools.combinations(A.clauses, k):
            merged = _intersect(combo)
            if merged is None:
                continue
            p = 1.0
            for site, allowed in sorted(merged.items()):
                p *= model.site(site).prob_of(allowed)
            terms.append(sign * p)
    return math.fsum(terms)


# --- config files -----------------------------------------------------------

def _site_from_config(cfg: Mapping[str, Any]) -> SiteDistribution:
    return SiteDistribution.make(cfg["support"], cfg["probs"])


def _table_from_pairs(B: Region, pairs, model_sites: list[SiteDistribution]) -> np.ndarray:
    shape = tuple(len(d.support) for d in model_sites)
    table = np.zeros(shape)
    seen = set()
    for config, value in pairs:
        if len(config) != len(B):
            raise InvalidInputError(f"configuration {config} does not match {len(B)} sites")
        idx = tuple(d.index(v) for d, v in zip(model_sites, config))
        if idx in seen:
            raise InvalidInputError(f"duplicate table entry for {config}")
        seen.add(idx)
        table[idx] = float(value)
    if len(seen) != table.size:
        raise InvalidInputError(f"table for {[list(p) for p in B]} does not cover every configuration")
    return table


def model_from_config(cfg: Mapping[str, Any]) -> InteractionModel:
    """Build a model from the JSON-shaped config described in the README."""
    try:
        kind = cfg.get("model", "custom")
        nu = int(cfg["nu"])
        lam = float(cfg["lambda"])
        if kind == "ising":
            fields = cfg.get("fields", 0.0)
            if isinstance(fields, list):
                h = {tuple(f["site"]): float(f["h"]) for f in fields}
                return build_ising(nu, lam, cfg.get("couplings", 1.0), h,
                                   float(cfg.get("default_field", 0.0)))
            return build_ising(nu, lam, cfg.get("couplings", 1.0), float(fields))
        if kind == "potts":
            return build_potts(nu, lam, int(cfg["q"]), cfg.get("couplings", 1.0))
        if kind != "custom":
            raise InvalidInputError(f"unknown model kind {kind!r}")
        r = int(cfg["r"])
        sites = cfg["sites"]
        if "default" in sites:
            default = _site_from_config(sites["default"])
            overrides = {tuple(o["site"]): _site_from_config(o) for o in sites.get("overrides", [])}
        else:
            default, overrides = _site_from_config(sites), {}
        terms = []
        for term in cfg.get("terms", []):
            B = lattice.region(term["points"])
            dists = [overrides.get(t, default) for t in B]
            terms.append((B, _table_from_pairs(B, term["table"], dists), bool(term.get("translate", False))))
        return build_custom(nu, r, lam, default, terms, overrides)
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed model config: {exc!r}") from exc


def event_from_config(cfg: Mapping[str, Any]) -> CylinderEvent:
    """Event config: {"base": [...points...], "clauses": [...]}.

    Each clause is either one constraint {"site": [...], "allowed": [...]} or a
    list of such constraints read as a conjunction; an empty list is the whole space.
    """
    try:
        clauses = []
        for clause in cfg["clauses"]:
            constraints = [clause] if isinstance(clause, Mapping) else clause
            conj: dict[Point, frozenset] = {}
            for c in constraints:
                site = lattice.point(c["site"])
                allowed = frozenset(float(v) for v in c["allowed"])
                conj[site] = conj[site] & allowed if site in conj else allowed
            if all(conj.values()):
                clauses.append(conj)
        return CylinderEvent.make(cfg["base"], clauses)
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed event config: {exc!r}") from exc


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
