"""Command-line front end.

Subcommands: size, constants, finite-prob, expand, verify. Reports are JSON
(floats with 17 significant digits) or CSV, and identical inputs give
byte-identical output for any --threads value.

Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
3 resource guard refusal, 4 convergence certificate refused.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Sequence

from . import graphkit, lattice
from .errors import CertificateRefusedError, InvalidInputError, ResourceGuardError
from .exactgibbs import gibbs_probability
from .expansion import consistency_check, m_stabilization, thermodynamic_probability, verify_bounds
from .model import event_from_config, event_probability_p0, load_json, model_from_config
from .parallel import set_default_threads

EXIT_CHECK_FAILED = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_CERTIFICATE = 4


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats printed to 17 significant digits, keys in given order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(str(obj))
        return format(obj, ".17g")
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, int) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(str(x) for x in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj)}")


def _parse_points(text: str) -> list[tuple[int, ...]]:
    try:
        data = json.loads("[" + text + "]")
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"cannot parse points {text!r}") from exc
    if data and all(isinstance(x, int) for x in data):
        data = [[x] for x in data]
    return [lattice.point(p) for p in data]


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _model_config(args) -> dict:
    if not args.model:
        raise InvalidInputError("--model FILE is required")
    cfg = load_json(args.model)
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidInputError(f"--set expects key=value, got {item!r}")
        cfg[key] = _parse_value(value)
    if args.lam is not None:
        cfg["lambda"] = args.lam
    if args.nu is not None:
        cfg["nu"] = args.nu
    if args.r is not None:
        cfg["r"] = args.r
    return cfg


def _load(args):
    model = model_from_config(_model_config(args))
    if not args.event:
        raise InvalidInputError("--event FILE is required")
    event = event_from_config(load_json(args.event))
    return model, event


def _records_csv(records: list[dict]) -> str:
    lines = ["lemma,parameters,measured,bound,pass"]
    for rec in records:
        params = ";".join(f"{k}={v}" for k, v in rec["parameters"].items())
        vals = [format(v, ".17g") if isinstance(v, float) else str(v)
                for v in (rec["measured"], rec["bound"])]
        lines.append(f"{rec['lemma']},{params},{vals[0]},{vals[1]},{str(rec['pass']).lower()}")
    return "\n".join(lines) + "\n"


def _emit(args, payload: dict, csv_text: str | None = None) -> None:
    text = csv_text if args.format == "csv" and csv_text is not None else dumps(payload) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_size(args) -> int:
    pts = _parse_points(args.points)
    if args.nu is not None and any(len(p) != args.nu for p in pts):
        raise InvalidInputError(f"points must have {args.nu} coordinates")
    S = graphkit.size_of(pts)
    g = graphkit.associated_graph(pts)
    payload = {
        "points": [list(p) for p in lattice.region(pts)],
        "S": S,
        "associated_graph": {
            "vertices": [list(v) for v in g.vertices],
            "edges": [[list(a), list(b)] for a, b in g.edges],
        },
        "associated_track": [list(p) for p in graphkit.associated_track(pts)],
    }
    _emit(args, payload)
    return 0


def constants_payload(nu: int, r: int, max_track_len: int = 6) -> dict:
    L = graphkit.l_max(nu, r)
    lam0 = graphkit.lambda0(nu, r)
    checks = [graphkit.verify_track_count(nu, n) for n in range(2, max_track_len + 1)]
    checks += [graphkit.verify_sets_per_track(nu, r), graphkit.verify_sets_per_point(nu, r),
               graphkit.verify_l_bound(nu, r)]
    return {
        "nu": nu, "r": r, "L": L,
        "lambda0": f"{lam0.numerator}/{lam0.denominator}",
        "lambda0_float": float(lam0),
        "checks": [c.to_dict() for c in checks],
    }


def cmd_constants(args) -> int:
    nu = args.nu if args.nu is not None else 1
    r = args.r if args.r is not None else 1
    payload = constants_payload(nu, r)
    _emit(args, payload, _records_csv(payload["checks"]))
    return 0 if all(c["pass"] for c in payload["checks"]) else EXIT_CHECK_FAILED


def cmd_finite_prob(args) -> int:
    model, event = _load(args)
    if args.N is None:
        raise InvalidInputError("--N is required")
    p = gibbs_probability(model, args.N, event, threads=args.threads)
    _emit(args, {"N": args.N, "P_N": p, "P0": event_probability_p0(model, event)})
    return 0


def cmd_expand(args) -> int:
    model, event = _load(args)
    n_max = 3 if args.n_max is None else args.n_max
    report = thermodynamic_probability(model, event, n_max, rho=args.rho,
                                       oracle_N=args.N, threads=args.threads)
    _emit(args, report.to_dict(), report.to_csv())
    return 0 if report.lambda_check else EXIT_CERTIFICATE


def _default_extra_site(base) -> tuple[int, ...]:
    bset = set(base)
    return min(q for t in base for q in lattice.unit_neighbors(t) if q not in bset)


def cmd_verify(args) -> int:
    model, event = _load(args)
    n_max = 4 if args.n_max is None else args.n_max
    q = graphkit.size_of(event.base)
    d = lattice.distance_to_origin(event.base)
    N = args.N if args.N is not None else m_stabilization(n_max, model.r, q, d)
    records = [r.to_dict() for r in verify_bounds(model, event, range(1, n_max + 1), N,
                                                   threads=args.threads)]
    extra = _parse_points(args.extra_site)[0] if args.extra_site else _default_extra_site(event.base)
    consistency = consistency_check(model, event, list(event.base) + [extra], max(n_max, 3),
                                    threads=args.threads)
    payload = {"N": N, "verify_bounds": records, "consistency": consistency}
    _emit(args, payload, _records_csv(records))
    ok = all(r["pass"] for r in records) and consistency["pass"] and consistency["permutation_identical"]
    return 0 if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model config (JSON)")
    common.add_argument("--event", help="event config (JSON)")
    common.add_argument("--nu", type=int)
    common.add_argument("--r", type=int)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--N", type=int)
    common.add_argument("--n-max", dest="n_max", type=int)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", help="write report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a model config key (value parsed as JSON)")

    parser = argparse.ArgumentParser(prog="clustergibbs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("size", parents=[common], help="size, associated graph and track of a set")
    p.add_argument("--points", required=True, help='e.g. "[0,0],[1,1]"')
    p.set_defaults(func=cmd_size)
    p = sub.add_parser("constants", parents=[common], help="L, lambda_0 and counting-lemma checks")
    p.set_defaults(func=cmd_constants)
    p = sub.add_parser("finite-prob", parents=[common], help="exact P_N(A) by enumeration")
    p.set_defaults(func=cmd_finite_prob)
    p = sub.add_parser("expand", parents=[common], help="cluster expansion report")
    p.add_argument("--rho", default="model", help="tail ratio: model, fixed (0.9) or a number")
    p.set_defaults(func=cmd_expand)
    p = sub.add_parser("verify", parents=[common], help="bound checks and consistency checks")
    p.add_argument("--extra-site", help="site added to the base for the consistency check")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    set_default_threads(args.threads)
    if getattr(args, "rho", None) not in (None, "model", "fixed"):
        try:
            args.rho = float(args.rho)
        except ValueError:
            print("error: --rho must be model, fixed (0.9) or a number", file=sys.stderr)
            return EXIT_INVALID
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceGuardError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except CertificateRefusedError as exc:
        print(f"certificate refused: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
