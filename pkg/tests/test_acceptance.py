"""Acceptance suite: one check per criterion, each reporting a PASS/FAIL line.

Run under pytest (lines appear in the terminal summary) or directly with
`python3 tests/test_acceptance.py`.
"""
import contextlib
import io
import itertools
import math
import pathlib
import sys
import time
from fractions import Fraction

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).parent))

import acceptance_log  # noqa: E402
import oracles  # noqa: E402
from clustergibbs import graphkit  # noqa: E402
from clustergibbs.cli import constants_payload, main  # noqa: E402
from clustergibbs.cumulants import semi_invariant  # noqa: E402
from clustergibbs.exactgibbs import gibbs_probability  # noqa: E402
from clustergibbs.expansion import (  # noqa: E402
    consistency_check,
    enumerate_q_connected_families,
    j_term,
    j_term_detail,
    m_stabilization,
    model_rho,
    thermodynamic_probability,
)
from clustergibbs import lattice  # noqa: E402
from clustergibbs.model import CylinderEvent, Observable, SiteDistribution, build_custom, build_ising, field_for  # noqa: E402

ROOT = pathlib.Path(__file__).resolve().parents[1]
LAMBDA0 = float(Fraction(1, 9600))
A_UP = CylinderEvent.make([(0,)], [{(0,): [1]}])


def fixture(h=None):
    return build_ising(1, LAMBDA0, 1.0, field_for(0.6) if h is None else h)


def _clear_caches():
    for fn in (graphkit._steiner_size, graphkit._associated_graph_shape,
               graphkit._sets_at_origin, graphkit.l_max):
        fn.cache_clear()


def check_1():
    _clear_caches()
    t0 = time.perf_counter()
    p11, p21 = constants_payload(1, 1), constants_payload(2, 1)
    elapsed = time.perf_counter() - t0
    ok = (p11["L"] == 3 and p21["L"] == 7 and graphkit.lambda0(1, 1) == Fraction(1, 9600)
          and p11["lambda0"] == "1/9600" and elapsed < 1.0)
    return ok, f"L(1,1)={p11['L']} L(2,1)={p21['L']} lambda0(1,1)={p11['lambda0']} in {elapsed:.2f}s"


def check_2():
    _clear_caches()
    t0 = time.perf_counter()
    records = []
    for nu in (1, 2):
        records += [graphkit.verify_track_count(nu, n) for n in range(2, 7)]
        for r in (1, 2):
            records += [graphkit.verify_sets_per_track(nu, r), graphkit.verify_sets_per_point(nu, r),
                        graphkit.verify_l_bound(nu, r)]
    elapsed = time.perf_counter() - t0
    bad = [rec for rec in records if not rec.passed]
    return not bad and elapsed < 60, f"{len(records)} checks, {len(bad)} violations in {elapsed:.1f}s"


def _random_obs(rng, sites, law_size):
    k = int(rng.integers(1, 3))
    start = int(rng.integers(0, len(sites) - k + 1))
    support = tuple(sites[start:start + k])
    return Observable(support, rng.uniform(-1, 1, size=(law_size,) * k))


def check_3():
    rng = np.random.default_rng(20261019)
    law = SiteDistribution.make([0, 1, 2], [0.2, 0.5, 0.3])
    model = build_custom(1, 1, 0.0, law, [])
    sites = [(i,) for i in range(4)]

    # (a) sequences split into two non-intersecting groups
    worst_a, cases = 0.0, 0
    for _ in range(150):
        n = int(rng.integers(2, 6))
        items = [_random_obs(rng, sites, 3) for _ in range(n)]
        cut = int(rng.integers(1, n))
        far = [Observable(tuple((t[0] + 20,) for t in o.support), o.table) for o in items[cut:]]
        worst_a = max(worst_a, abs(semi_invariant(model, items[:cut] + far)))
        cases += 1

    # (b) partition formula against finite differences of the log-MGF
    dists = {t: ([0, 1, 2], [0.2, 0.5, 0.3]) for t in sites}
    worst_b = 0.0
    for length in range(1, 5):
        for _ in range(5):
            items = [_random_obs(rng, sites, 3) for _ in range(length)]
            tabs = [(o.support, {cfg: o.table[cfg] for cfg in np.ndindex(*o.table.shape)}) for o in items]
            worst_b = max(worst_b, abs(semi_invariant(model, items) - oracles.log_mgf_derivative(dists, tabs)))

    # (c) every ordering gives the same float
    exact = True
    for _ in range(10):
        items = [_random_obs(rng, sites, 3) for _ in range(5)]
        ref = semi_invariant(model, items)
        exact &= all(semi_invariant(model, list(p)) == ref for p in itertools.permutations(items))
    ok = cases >= 100 and worst_a <= 1e-12 and worst_b <= 1e-6 and exact
    return ok, f"(a) {cases} cases max {worst_a:.1e}; (b) max err {worst_b:.1e}; (c) exact={exact}"


def check_4():
    model = fixture()
    t0 = time.perf_counter()
    partial = math.fsum(j_term(model, A_UP, m_stabilization(n, 1, 0, 0), n) for n in range(4))
    bound = 10 * 4 ** 0 * 0.6 * model_rho(model) ** 4 * 5
    diffs = [abs(partial - gibbs_probability(model, N, A_UP)) for N in (4, 5, 6)]
    elapsed = time.perf_counter() - t0
    ok = all(d <= bound for d in diffs) and elapsed < 300
    return ok, f"max |diff|={max(diffs):.2e} <= {bound:.3g} in {elapsed:.1f}s"


def check_5():
    model = fixture()
    worst = 0.0
    for n in range(4):
        Mn = m_stabilization(n, 1, 0, 0)
        ref = j_term(model, A_UP, Mn, n)
        for N in range(Mn, Mn + 3):
            worst = max(worst, abs(j_term(model, A_UP, N, n) - ref))
    return worst <= 1e-12, f"max deviation {worst:.1e}"


def check_6():
    model = fixture()
    p0, q = 0.6, 0
    worst_ratio = 0.0
    for n in (4, 5):
        J, _ = j_term_detail(model, A_UP, m_stabilization(n, 1, q, 0), n)
        worst_ratio = max(worst_ratio, abs(J) / (4 ** q * p0 * 0.9 ** n * (n + 1)))
    counts_ok = True
    counts = []
    for n in range(1, 6):
        c = len(enumerate_q_connected_families(A_UP.base, n, lattice.cube(m_stabilization(n, 1, q, 0), 1), 1))
        counts.append(c)
        counts_ok &= c <= 4 ** q * (2 * 8 ** 2) ** n
    ok = worst_ratio <= 1 and counts_ok
    return ok, f"max |J|/bound={worst_ratio:.1e}; family counts {counts}"


def check_7():
    model = fixture()
    base = [(0,), (1,)]
    empty = gibbs_probability(model, 2, CylinderEvent.make(base, []))
    whole = gibbs_probability(model, 2, CylinderEvent.make(base, [{}]))
    union = CylinderEvent.make(base, [{(0,): [1]}, {(1,): [1]}])
    parts = [CylinderEvent.make(base, [{(0,): [a], (1,): [b]}]) for a, b in ((1, 1), (1, -1), (-1, 1))]
    err = abs(gibbs_probability(model, 2, union) - math.fsum(gibbs_probability(model, 2, p) for p in parts))
    ok = empty == 0.0 and whole == 1.0 and err <= 1e-12
    return ok, f"P(empty)={empty} P(all)={whole} additivity err {err:.1e}"


def check_8():
    out = consistency_check(fixture(), A_UP, [(0,), (1,)], 3)
    ok = out["pass"] and out["permutation_identical"]
    return ok, (f"difference {out['difference']:.1e} <= tails {out['combined_tail']:.3g}; "
                f"permutation identical={out['permutation_identical']}")


def check_9():
    rep = thermodynamic_probability(fixture(h=0.0), A_UP, 5)
    odd = max(abs(t["J"]) for t in rep.terms if t["n"] % 2)
    ok = rep.partial_sum == 0.5 and odd <= 1e-12
    return ok, f"partial sum {rep.partial_sum!r}, max odd term {odd:.1e}"


def check_10():
    outs = []
    for threads in ("1", "8"):
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = main(["expand", "--model", str(ROOT / "configs" / "ising_asym.json"),
                         "--event", str(ROOT / "configs" / "event_site0_up.json"),
                         "--n-max", "4", "--N", "6", "--threads", threads])
        outs.append((code, buf.getvalue().encode()))
    ok = outs[0] == outs[1] and outs[0][0] == 0
    return ok, f"{len(outs[0][1])} bytes, identical={outs[0] == outs[1]}"


CHECKS = {k: globals()[f"check_{k}"] for k in range(1, 11)}


def _run(k):
    try:
        ok, detail = CHECKS[k]()
    except Exception as exc:  # report, then fail
        ok, detail = False, f"raised {exc!r}"
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    acceptance_log.LINES[k] = line
    print(line)
    return ok, line


def test_criterion_1_constants():
    ok, line = _run(1)
    assert ok, line


def test_criterion_2_counting():
    ok, line = _run(2)
    assert ok, line


def test_criterion_3_cumulants():
    ok, line = _run(3)
    assert ok, line


def test_criterion_4_series_identity():
    ok, line = _run(4)
    assert ok, line


def test_criterion_5_stabilization():
    ok, line = _run(5)
    assert ok, line


def test_criterion_6_tail_bounds():
    ok, line = _run(6)
    assert ok, line


def test_criterion_7_measure_axioms():
    ok, line = _run(7)
    assert ok, line


def test_criterion_8_consistency():
    ok, line = _run(8)
    assert ok, line


def test_criterion_9_symmetry():
    ok, line = _run(9)
    assert ok, line


def test_criterion_10_determinism():
    ok, line = _run(10)
    assert ok, line


if __name__ == "__main__":
    results = [_run(k)[0] for k in CHECKS]
    sys.exit(0 if all(results) else 1)
