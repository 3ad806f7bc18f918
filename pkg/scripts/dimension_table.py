"""Compare the closed-form dimension with the certificate bisection scan.

Runs a handful of nu / sigma sequences; expect a few seconds per row.
"""
import argparse
import time

from apcf import ap, covering
from apcf.errors import NoCertificate
from apcf.seqspec import parse

DEFAULT_ROWS = [
    ("F", "nu(n) = n"),
    ("F", "nu(n) = 2*n"),
    ("F", "nu(n) = 3*n"),
    ("G", "sigma(n) = n*(n+1)"),
    ("G", "sigma(n) = 2*n^2"),
]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--tol", type=float, default=5e-3)
    p.add_argument("--horizon", type=int, default=covering.DEFAULT_HORIZON)
    p.add_argument("rows", nargs="*", help="FAMILY:SPEC pairs, e.g. 'F:nu(n) = 4*n'")
    args = p.parse_args()

    rows = [tuple(r.split(":", 1)) for r in args.rows] or DEFAULT_ROWS
    print(f"{'family':<7}{'sequence':<26}{'growth':>9}{'formula':>10}{'scan':>10}{'time':>8}")
    for family, text in rows:
        spec = parse(text)
        g = ap.growth_constants(spec, 4000).value
        formula = covering.dim_formula(family, g)
        t0 = time.perf_counter()
        try:
            scan = f"{covering.dim_upper_scan(spec, family, args.tol, args.horizon):.5f}"
        except NoCertificate:
            scan = "none"
        dt = time.perf_counter() - t0
        print(f"{family:<7}{spec.canonical():<26}{g:>9.4f}{formula:>10.5f}{scan:>10}{dt:>7.1f}s")


if __name__ == "__main__":
    main()
