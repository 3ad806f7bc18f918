"""Print the lower-bound ratios A_k, B_k for a Lambda_t construction.

    python3 scripts/ratio_table.py --family F --spec "nu(n) = n" --t 2 --k-max 8
"""
import argparse

from apcf import construct
from apcf.seqspec import parse


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", choices=("F", "G"), default="F")
    ap.add_argument("--spec", default=None, help="defaults to nu(n) = n or sigma(n) = n*(n+1)")
    ap.add_argument("--t", type=int, default=2)
    ap.add_argument("--k-max", type=int, default=8)
    args = ap.parse_args()

    text = args.spec or ("nu(n) = n" if args.family == "F" else "sigma(n) = n*(n+1)")
    spec = parse(text)
    params = construct.make_params(args.family, spec, args.t, k_min=args.k_max + 1)
    rs = construct.ratio_series(params, args.k_max)

    print(f"{args.family}  {spec.canonical()}  t={args.t}")
    print(f"limits: A -> {rs.limit_A:.6f}   B -> {rs.limit_B:.6f}")
    print(f"{'k':>3} {'A_k':>12} {'B_k':>12} {'min':>12} {'err':>10}")
    for i, k in enumerate(rs.k):
        a, b = rs.A[i], rs.B[i]
        err = max(rs.A_err[i], rs.B_err[i])
        print(f"{k:>3} {a:>12.6f} {b:>12.6f} {min(a, b):>12.6f} {err:>10.2e}")


if __name__ == "__main__":
    main()
