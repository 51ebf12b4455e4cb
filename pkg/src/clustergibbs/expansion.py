"""Cluster expansion of finite-volume Gibbs probabilities.

P_N(A) = sum_n J_A(N, n), where

    J_A(N, n) = sum over Q-connected families G of length n inside the cube
                of (1 / G!) <I_A, Phi_G>_0

and Q is the base of the cylinder event A. Each J term stops changing once
N >= M_n = r(n+1) + q + d, so every term is evaluated on its own minimal cube.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from . import graphkit, lattice
from .cumulants import semi_invariant_family
from .errors import CertificateRefusedError, InvalidInputError, ResourceGuardError
from .exactgibbs import gibbs_probability
from .lattice import Point, Region
from .model import CylinderEvent, InteractionModel, event_probability_p0
from .parallel import chunked, ordered_map
from .records import VerificationRecord

DEFAULT_FAMILY_BUDGET = 2_000_000
FIXED_RHO = 0.9


@dataclass(frozen=True, order=True)
class Family:
    """Multiset of distinct interaction sets, entries sorted by set."""

    entries: tuple[tuple[Region, int], ...] = ()

    @classmethod
    def make(cls, entries: Iterable[tuple[Iterable[Point], int]]) -> "Family":
        merged: dict[Region, int] = {}
        for pts, mult in entries:
            if mult < 1:
                raise InvalidInputError("multiplicities must be >= 1")
            B = lattice.region(pts)
            merged[B] = merged.get(B, 0) + int(mult)
        return cls(tuple(sorted(merged.items())))

    @property
    def sets(self) -> list[Region]:
        return [C for C, _ in self.entries]

    def length(self) -> int:
        return sum(m for _, m in self.entries)

    def factorial(self) -> int:
        return math.prod(math.factorial(m) for _, m in self.entries)

    def to_list(self) -> list:
        return [[[list(p) for p in C], m] for C, m in self.entries]


def u_weight(family: Family, j: int) -> int:
    """Total multiplicity of entries whose set meets the j-th set (itself included)."""
    if not 0 <= j < len(family.entries):
        raise InvalidInputError(f"index {j} out of range")
    Cj = set(family.entries[j][0])
    return sum(m for C, m in family.entries if Cj.intersection(C))


def reduction_count(family: Family) -> int:
    """Number of sequences reducing to the family: |G|! / G!."""
    return math.factorial(family.length()) // family.factorial()


def _compositions(n: int, k: int):
    if k == 1:
        yield (n,)
        return
    for first in range(1, n - k + 2):
        for rest in _compositions(n - first, k - 1):
            yield (first,) + rest


def connected_collections(Q: Sequence[Point], kmax: int,
                          candidates: Callable[[Point], Iterable[Region]],
                          budget: int = DEFAULT_FAMILY_BUDGET) -> list[list[tuple[Region, ...]]]:
    """Sets of k distinct candidate sets making (Q, C_1..C_k) connected, k = 0..kmax.

    Grown one set at a time from the points already covered; any connected
    collection can be built this way (add sets in breadth-first order from Q).
    """
    Q = lattice.region(Q)
    levels: list[list[tuple[Region, ...]]] = [[()]]
    cache: dict[Point, list[Region]] = {}

    def cands(t):
        if t not in cache:
            cache[t] = list(candidates(t))
        return cache[t]

    total = 1
    for _ in range(kmax):
        nxt = set()
        for coll in levels[-1]:
            cover = set(Q).union(*coll) if coll else set(Q)
            have = set(coll)
            for t in cover:
                for C in cands(t):
                    if C not in have:
                        nxt.add(tuple(sorted(have | {C})))
            total += len(nxt)
            if total > budget:
                raise ResourceGuardError(f"more than {budget} connected collections")
        levels.append(sorted(nxt))
    return levels


def _family_candidates(container: Sequence[Point], r: int,
                       sets_containing: Callable[[Point], Iterable[Region]] | None):
    inside = set(lattice.region(container))
    source = sets_containing or (lambda t: graphkit.enumerate_sets_containing(t, r))

    def cands(t):
        return [C for C in source(t) if inside.issuperset(C)]

    return cands


def enumerate_q_connected_families(Q: Sequence[Point], n: int, container: Sequence[Point],
                                   r: int, *, sets_containing=None,
                                   budget: int = DEFAULT_FAMILY_BUDGET) -> list[Family]:
    """All Q-connected families of length n with every set inside container, sorted.

    Sets range over all interaction sets (1 <= S <= r) by default; pass
    `sets_containing` to restrict them (e.g. to sets carrying a potential term).
    """
    if n < 0:
        raise InvalidInputError("family length must be >= 0")
    if n == 0:
        return [Family()]
    levels = connected_collections(Q, n, _family_candidates(container, r, sets_containing), budget)
    out = []
    for k in range(1, n + 1):
        n_comp = math.comb(n - 1, k - 1)
        if len(out) + n_comp * len(levels[k]) > budget:
            raise ResourceGuardError(f"more than {budget} families of length {n}")
        for coll in levels[k]:
            for mults in _compositions(n, k):
                out.append(Family(tuple(zip(coll, mults))))
    out.sort()
    return out


def _event_q(A: CylinderEvent) -> tuple[int, int]:
    return graphkit.size_of(A.base), lattice.distance_to_origin(A.base)


def m_stabilization(n: int, r: int, q: int, d: int) -> int:
    """Cube half-width beyond which J_A(N, n) is constant."""
    return r * (n + 1) + q + d


def _family_value(model: InteractionModel, Y, family: Family) -> float:
    entries = []
    for C, mult in family.entries:
        term = model.term(C)
        if term is None:
            return 0.0
        entries.append((term, mult))
    return semi_invariant_family(model, Y, entries) / family.factorial()


def j_term_detail(model: InteractionModel, A: CylinderEvent, N: int, n: int, *,
                  threads: int | None = None) -> tuple[float, int]:
    """(J_A(N, n), number of families summed)."""
    if any(not lattice.in_cube(t, N) for t in A.base):
        raise InvalidInputError(f"event base is not inside the cube of half-width {N}")
    families = enumerate_q_connected_families(
        A.base, n, lattice.cube(N, model.nu), model.r,
        sets_containing=model.active_sets_containing,
    )
    Y = A.indicator(model)

    def work(chunk):
        return [_family_value(model, Y, f) for f in chunk]

    values = [v for part in ordered_map(work, chunked(families, 64), threads) for v in part]
    return math.fsum(values), len(families)


def j_term(model: InteractionModel, A: CylinderEvent, N: int, n: int, *,
           threads: int | None = None) -> float:
    return j_term_detail(model, A, N, n, threads=threads)[0]


def tail_bound(q: int, p0a: float, n0: int, rho: float) -> float:
    """4^q * P_0(A) * sum_{n >= n0} rho^n (n+1), in closed form."""
    if not 0 <= rho < 1:
        raise InvalidInputError(f"ratio {rho} must lie in [0, 1)")
    if n0 < 4:
        raise InvalidInputError("the per-term bound only holds for n > 3")
    if rho == 0:
        return 0.0
    return 4 ** q * p0a * rho ** n0 * ((n0 + 1) - n0 * rho) / (1 - rho) ** 2


def model_rho(model: InteractionModel) -> float:
    """lambda * 6 e^2 L (8 nu)^(2r): per-order ratio of the J-term bound."""
    L = graphkit.l_max(model.nu, model.r)
    return model.lam * 6 * math.e ** 2 * L * (8 * model.nu) ** (2 * model.r)


def is_certified(model: InteractionModel) -> bool:
    # Compare against the correctly rounded threshold so that lambda given as
    # the float nearest 1/9600 etc. counts as lambda_0 itself.
    return model.lam <= float(graphkit.lambda0(model.nu, model.r))


@dataclass
class ExpansionReport:
    terms: list[dict[str, Any]]
    partial_sum: float
    tail_bound: float | None
    rho: float
    lambda_check: bool
    lambda0: Fraction
    q: int
    d: int
    p0: float
    oracle_comparison: dict[str, Any] | None = None
    warnings: list[str] = field(default_factory=list)
    parameters: dict[str, Any] = field(default_factory=dict)

    def tail_after(self, n: int) -> float | None:
        if not self.lambda_check or n + 1 < 4:
            return None
        return tail_bound(self.q, self.p0, n + 1, self.rho)

    def rows(self) -> list[dict[str, Any]]:
        out, running = [], []
        for t in self.terms:
            running.append(t["J"])
            out.append({
                "n": t["n"], "M_n": t["M_n"], "family_count": t["family_count"],
                "J_n": t["J"], "running_sum": math.fsum(running),
                "tail_at_next": self.tail_after(t["n"]),
            })
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "parameters": self.parameters,
            "q": self.q,
            "d": self.d,
            "P0": self.p0,
            "lambda0": str(self.lambda0),
            "lambda0_float": float(self.lambda0),
            "lambda_check": self.lambda_check,
            "rho": self.rho,
            "terms": self.rows(),
            "partial_sum": self.partial_sum,
            "tail_bound": self.tail_bound,
            "oracle_comparison": self.oracle_comparison,
            "warnings": list(self.warnings),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["n", "M_n", "family_count", "J_n", "running_sum", "tail_at_next"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in self.rows():
            w.writerow([_fmt(row[c]) for c in cols])
        return buf.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _resolve_rho(model: InteractionModel, rho) -> float:
    if rho == "model":
        return model_rho(model)
    if rho == "fixed":
        return FIXED_RHO
    return float(rho)


def thermodynamic_probability(model: InteractionModel, A: CylinderEvent, n_max: int, *,
                              rho: str | float = "model", oracle_N: int | None = None,
                              require_certificate: bool = False,
                              threads: int | None = None) -> ExpansionReport:
    """Partial sum of the expansion through order n_max with a certified tail.

    Each J term is computed at its own stabilization radius M_n, so the partial
    sum equals the infinite-volume one through order n_max. The tail bound is
    only attached when lambda <= lambda_0 and n_max >= 3.
    """
    if n_max < 0:
        raise InvalidInputError("n_max must be >= 0")
    certified = is_certified(model)
    if require_certificate and not certified:
        raise CertificateRefusedError(
            f"lambda = {model.lam} exceeds lambda_0 = {float(graphkit.lambda0(model.nu, model.r))}"
        )
    q, d = _event_q(A)
    p0 = event_probability_p0(model, A)
    r_val = _resolve_rho(model, rho)
    warnings = []
    terms = []
    for n in range(n_max + 1):
        Mn = m_stabilization(n, model.r, q, d)
        J, count = j_term_detail(model, A, Mn, n, threads=threads)
        terms.append({"n": n, "M_n": Mn, "family_count": count, "J": J})
    partial = math.fsum(t["J"] for t in terms)
    tail = None
    if not certified:
        warnings.append("lambda exceeds lambda_0: convergence certificate withheld")
    elif n_max < 3:
        warnings.append("n_max < 3: no tail bound (per-term bound needs n > 3)")
    elif r_val >= 1:
        warnings.append("ratio >= 1: no tail bound")
    else:
        tail = tail_bound(q, p0, n_max + 1, r_val)
    report = ExpansionReport(
        terms=terms, partial_sum=partial, tail_bound=tail, rho=r_val,
        lambda_check=certified, lambda0=graphkit.lambda0(model.nu, model.r),
        q=q, d=d, p0=p0, warnings=warnings,
        parameters={"model": model.name, "nu": model.nu, "r": model.r,
                    "lambda": model.lam, "n_max": n_max,
                    "base": [list(p) for p in A.base]},
    )
    if oracle_N is not None:
        exact = gibbs_probability(model, oracle_N, A, threads=threads)
        report.oracle_comparison = {"N": oracle_N, "P_N": exact,
                                    "abs_difference": abs(partial - exact)}
    return report


def _u_all(family: Family) -> list[int]:
    return [u_weight(family, j) for j in range(len(family.entries))]


def verify_bounds(model: InteractionModel, A: CylinderEvent, n_range: Iterable[int], N: int, *,
                  threads: int | None = None) -> list[VerificationRecord]:
    """Check the counting and semi-invariant inequalities on every enumerated family.

    Families range over all interaction sets inside the cube of half-width N;
    sets without a potential term contribute zero semi-invariants.
    """
    nu, r, lam = model.nu, model.r, model.lam
    L = graphkit.l_max(nu, r)
    q, _ = _event_q(A)
    p0 = event_probability_p0(model, A)
    Y = A.indicator(model)
    container = lattice.cube(N, nu)
    certified = is_certified(model)
    records = []
    for n in n_range:
        if n < 1:
            continue
        params = {"n": n, "N": N, "nu": nu, "r": r, "lambda": lam}
        fams = enumerate_q_connected_families(A.base, n, container, r)
        count_bound = 4 ** q * (2 * (8 * nu) ** (2 * r)) ** n
        records.append(VerificationRecord("family_count", params, len(fams), count_bound,
                                          len(fams) < count_bound))

        def work(chunk):
            return [_family_value(model, Y, f) * f.factorial() for f in chunk]

        kappas = [v for part in ordered_map(work, chunked(fams, 64), threads) for v in part]

        worst_ln = worst_es1 = worst_mal = worst_mal2 = 0.0
        worst_ln_lhs = -math.inf
        for fam, kappa in zip(fams, kappas):
            us = _u_all(fam)
            ns = [m for _, m in fam.entries]
            lhs = math.fsum(m * math.log(u / m) for u, m in zip(us, ns))
            worst_ln_lhs = max(worst_ln_lhs, lhs)
            worst_ln = max(worst_ln, lhs - n * math.log(L))
            prod_u1 = math.prod((u + 1) ** m for u, m in zip(us, ns))
            es1_rhs = (math.e * L) ** n * math.prod(m ** m for m in ns)
            worst_es1 = max(worst_es1, prod_u1 / es1_rhs)
            mal = 4.5 * p0 * lam ** n * (n + 1) * 3 ** n * prod_u1
            worst_mal = max(worst_mal, abs(kappa) / mal if mal > 0 else (math.inf if kappa else 0.0))
            if n > 3:
                mal2 = p0 * lam ** n * (3 * math.e ** 2 * L) ** n * (n + 1) * fam.factorial()
                worst_mal2 = max(worst_mal2, abs(kappa) / mal2 if mal2 > 0 else (math.inf if kappa else 0.0))
        records.append(VerificationRecord("log_u_over_n", params, worst_ln_lhs, n * math.log(L),
                                          worst_ln <= 1e-12))
        records.append(VerificationRecord("u_product", params, worst_es1, 1.0, worst_es1 < 1.0))
        records.append(VerificationRecord("semi_invariant", params, worst_mal, 1.0, worst_mal <= 1.0))
        if n > 3:
            records.append(VerificationRecord("semi_invariant_factorial", params, worst_mal2, 1.0,
                                              worst_mal2 < 1.0))
            if certified:
                J = math.fsum(k / f.factorial() for f, k in zip(fams, kappas))
                bound = 4 ** q * p0 * FIXED_RHO ** n * (n + 1)
                records.append(VerificationRecord("j_term", params, abs(J), bound, abs(J) <= bound))
    return records


def consistency_check(model: InteractionModel, A: CylinderEvent, enlarged_base: Sequence[Point],
                      n_max: int, *, seed: int = 0, threads: int | None = None) -> dict[str, Any]:
    """Compare the expansion of A on its own base with A on a larger base.

    Also re-encodes A with shuffled site and clause order and checks that the
    partial sum is bit-identical.
    """
    if n_max < 3:
        raise InvalidInputError("consistency check needs n_max >= 3 for tail certificates")
    if not is_certified(model):
        raise CertificateRefusedError("consistency check needs lambda <= lambda_0")
    small = thermodynamic_probability(model, A, n_max, threads=threads)
    A2 = A.with_base(enlarged_base)
    big = thermodynamic_probability(model, A2, n_max, threads=threads)
    diff = abs(small.partial_sum - big.partial_sum)
    slack = small.tail_bound + big.tail_bound

    rng = random.Random(seed)
    base = list(A.base)
    rng.shuffle(base)
    clauses = [dict(c) for c in A.clauses]
    rng.shuffle(clauses)
    shuffled = CylinderEvent.make(base, [dict(rng.sample(list(c.items()), len(c))) for c in clauses])
    perm = thermodynamic_probability(model, shuffled, n_max, threads=threads)
    return {
        "base": [list(p) for p in A.base],
        "enlarged_base": [list(p) for p in A2.base],
        "partial_sum": small.partial_sum,
        "partial_sum_enlarged": big.partial_sum,
        "difference": diff,
        "combined_tail": slack,
        "pass": diff <= slack,
        "permutation_partial_sum": perm.partial_sum,
        "permutation_identical": perm.partial_sum == small.partial_sum,
    }
