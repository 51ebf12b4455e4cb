"""Tabulate L, lambda_0 and the counting checks for small (nu, r)."""
import argparse
import math

from clustergibbs import graphkit


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", default="1:1,1:2,2:1,2:2", help="comma-separated nu:r pairs")
    args = ap.parse_args()
    print(f"{'nu':>2} {'r':>2} {'|sets at 0|':>11} {'L':>4} {'lambda0':>14} {'rho(lambda0)':>13}  checks")
    for pair in args.pairs.split(","):
        nu, r = map(int, pair.split(":"))
        n_sets = len(graphkit.enumerate_sets_containing((0,) * nu, r))
        lam0 = graphkit.lambda0(nu, r)
        recs = [graphkit.verify_sets_per_track(nu, r), graphkit.verify_sets_per_point(nu, r),
                graphkit.verify_l_bound(nu, r)]
        recs += [graphkit.verify_track_count(nu, n) for n in range(2, 7)]
        status = "ok" if all(x.passed for x in recs) else "VIOLATION"
        L = graphkit.l_max(nu, r)
        rho = float(lam0) * 6 * math.e ** 2 * L * (8 * nu) ** (2 * r)
        print(f"{nu:>2} {r:>2} {n_sets:>11} {L:>4} {str(lam0):>14} {rho:>13.4f}  {status}")


if __name__ == "__main__":
    main()
