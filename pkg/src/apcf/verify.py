"""Property suites shared by the CLI ``verify`` command and the acceptance tests.

Each suite returns a list of :class:`Check` records; nothing here raises on
a failed property.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction

from . import cf, construct, covering
from .ap import check_F_membership, check_G_membership
from .cf import cylinder_lengths_den, is_strictly_increasing
from .errors import NoCertificate
from .seqspec import parse


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    elapsed: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}  {self.detail}  ({self.elapsed:.1f}s)"


def _timed(name, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    return Check(name, bool(ok), detail, time.perf_counter() - t0)


F_NU = "nu(n) = n"
G_SIGMA = "sigma(n) = n*(n+1)"


def default_params(family: str, t: int, cover: int):
    if family == "F":
        return construct.make_params("F", parse(F_NU), t, cover=cover)
    return construct.make_params("G", parse(G_SIGMA), t, cover=cover)


# --- qn-bounds ----------------------------------------------------------------

def roundtrip_failures(count: int, max_den: int, seed: int = 0) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        q = rng.randint(2, max_den)
        x = Fraction(rng.randint(1, q - 1), q)
        digits = cf.expand(x)
        conv = cf.convergents(digits)
        if Fraction(conv[-1].p, conv[-1].q) != x or cf.value(digits) != x:
            bad += 1
        elif len(digits) > 1 and digits[-1] < 2:
            bad += 1
    return bad


def qn_failures(count: int, max_depth: int = 30, max_digit: int = 1000, seed: int = 1) -> int:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        d = [rng.randint(1, max_digit) for _ in range(rng.randint(1, max_depth))]
        k = rng.randint(1, len(d))
        r = cf.verify_qn_bounds(d, k)
        if not (r["length"] and r["product"] and r["split"]):
            bad += 1
    return bad


def suite_qn_bounds(scale: float = 1.0) -> list[Check]:
    n = max(10, int(10**4 * scale))
    return [
        _timed(f"expand/convergents round trip ({n} rationals)",
               lambda: (lambda b: (b == 0, f"{b} failures"))(roundtrip_failures(n, 10**6))),
        _timed(f"cylinder length bounds ({n} digit tuples)",
               lambda: (lambda b: (b == 0, f"{b} failures"))(qn_failures(n))),
    ]


# --- measure ------------------------------------------------------------------

MEASURE_DEPTH = {2: 20, 3: 10}


def random_prefix(params, rng, max_depth):
    depth = rng.randint(0, max_depth)
    if depth == 0:
        return ()
    return construct.sample_point(params, rng.randrange(2**32), depth)


def compatibility_failures(family: str, t: int, count: int, seed: int = 0) -> int:
    params = default_params(family, t, MEASURE_DEPTH[t] + 2)
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        d = random_prefix(params, rng, MEASURE_DEPTH[t])
        if not construct.mu_additivity_check(params, d)["ok"]:
            bad += 1
    return bad


def suite_measure(scale: float = 1.0) -> list[Check]:
    n = max(10, int(1000 * scale))
    out = []
    for family in ("F", "G"):
        for t in (2, 3):
            params = default_params(family, t, 4)
            out.append(_timed(
                f"normalisation {family} t={t}",
                lambda p=params: (lambda r: (r["ok"] and r["parent"] == 1, f"sum = {r['children_sum']}"))(
                    construct.mu_additivity_check(p, ()))))
            out.append(_timed(
                f"compatibility {family} t={t} ({n} prefixes)",
                lambda f=family, tt=t: (lambda b: (b == 0, f"{b} failures"))(
                    compatibility_failures(f, tt, n))))
    return out


# --- Lambda inside J ----------------------------------------------------------

def lambda_failures(family: str, t: int, count: int, depth: int) -> int:
    params = default_params(family, t, depth)
    bad = 0
    for seed in range(count):
        d = construct.sample_point(params, seed, depth)
        if not is_strictly_increasing(d) or not construct.boundary_chain_ok(params, d):
            bad += 1
    return bad


def suite_lambda(scale: float = 1.0) -> list[Check]:
    n = max(10, int(1000 * scale))
    out = []
    for family in ("F", "G"):
        for t in (2, 3):
            out.append(_timed(
                f"Lambda in J {family} t={t} ({n} points, depth 500)",
                lambda f=family, tt=t: (lambda b: (b == 0, f"{b} failures"))(lambda_failures(f, tt, n, 500))))
    params = default_params("G", 2, 200)
    out.append(_timed("G samples keep every AP window", lambda: (lambda r: (
        r.verdict == "consistent", f"{r.checked} windows"))(
        check_G_membership(construct.sample_point(params, 3, 200), params.spec))))
    params = default_params("F", 2, 200)
    out.append(_timed("F samples witness AP windows", lambda: (lambda r: (
        r.verdict == "witnessed", f"{len(r.witnesses)} witnesses"))(
        check_F_membership(construct.sample_point(params, 3, 200), params.spec))))
    return out


# --- series -------------------------------------------------------------------

S_GRID = (0.26, 0.3, 0.4, 0.5)


def ap_grid():
    for a in range(1, 11):
        for ell in range(3, 9):
            for s in S_GRID:
                if 2 * s * ell > 1:
                    yield a, ell, s


def descend_grid():
    for c in range(2, 7):
        for n in range(2, 5):
            for s in S_GRID:
                g0 = 2 - (n - 1) * (2 * s - 1)
                for gamma in (g0, g0 + 0.5, g0 + 2.0):
                    yield c, n, s, gamma


def suite_series(scale: float = 1.0) -> list[Check]:
    trunc = max(1000, int(10**4 * scale))

    def ap():
        bad = [(a, l, s) for a, l, s in ap_grid() if not covering.ap_series_bound(a, l, s, trunc).holds]
        return not bad, f"{sum(1 for _ in ap_grid())} grid points, failures: {bad[:3]}"

    def desc():
        bad = [g for g in descend_grid() if not covering.descend_sum_bound(*g, trunc=trunc).holds]
        return not bad, f"{sum(1 for _ in descend_grid())} grid points, failures: {bad[:3]}"

    return [_timed("AP-segment series bound", ap), _timed("descending-tuple series bound", desc)]


# --- lower bound ratio and neighbours -------------------------------------------

def ratio_failures(family: str, t: int, depth: int, seeds=(0,)) -> tuple[int, int]:
    params = default_params(family, t, depth)
    series = None
    bad = total = 0
    for seed in seeds:
        d = construct.sample_point(params, seed, depth)
        rows = construct.local_dim_rows(params, d, series)
        for r in rows:
            if r["ok"] is False:
                bad += 1
            total += r["ok"] is not None
    return bad, total


def neighbor_max(count: int, seed: int = 0, depth: int = 40) -> tuple[int, int]:
    rng = random.Random(seed)
    params = default_params("F", 2, depth)
    worst = 0
    for i in range(count):
        d = construct.sample_point(params, rng.randrange(2**32), depth)
        lens = cylinder_lengths_den(d)
        n = rng.randrange(1, depth - 1)
        lo, hi = Fraction(1, lens[n]), Fraction(1, lens[n - 1])
        r = lo + (hi - lo) * Fraction(rng.randrange(1000), 1000)
        worst = max(worst, construct.neighbor_count_check(d, r))
    return worst, count


def suite_ratio(scale: float = 1.0) -> list[Check]:
    out = []
    for family in ("F", "G"):
        out.append(_timed(f"local ratio >= min(A_k, B_k) - 1e-6, {family} t=2 depth 200",
                          lambda f=family: (lambda r: (r[0] == 0, f"{r[0]} of {r[1]} rows below"))(
                              ratio_failures(f, 2, 200))))
    n = max(10, int(1000 * scale))
    out.append(_timed(f"neighbour count <= 4 ({n} balls)",
                      lambda: (lambda r: (r[0] <= 4, f"max count {r[0]}"))(neighbor_max(n))))
    return out


# --- certificates and dimension ---------------------------------------------------

def _rejects(fn):
    try:
        fn()
    except NoCertificate:
        return True
    return False


CLEAN_SPECS = (("F", "nu(n) = n", 1.0), ("F", "nu(n) = 3*n", 3.0), ("G", "sigma(n) = n*(n+1)", 2.0))


def suite_certificates(scale: float = 1.0) -> list[Check]:
    nu = parse(F_NU)
    sig = parse("sigma(n) = n*(n-1) + 1")
    out = [
        _timed("F certificate nu=n, s=0.3", lambda: (lambda c: (
            c.accepted and c.constants == {"delta": Fraction(1, 10), "N": 22}, str(c.constants)))(
            covering.f_certificate(nu, 0.3))),
        _timed("F rejects s below 1/4", lambda: (_rejects(lambda: covering.f_certificate(nu, 0.24)), "")),
        _timed("G certificate gap 2n, s=0.3", lambda: (lambda c: (
            c.accepted and c.constants["n0"] == 15, str(c.constants)))(covering.g_certificate(sig, 0.3))),
        _timed("G rejects s below 1/4", lambda: (_rejects(lambda: covering.g_certificate(sig, 0.24)), "")),
        _timed("stage factors <= 1 for gap 2n, s=0.3", lambda: (lambda rows: (
            all(r["ok"] for r in rows), f"max {max(r['bound'] for r in rows):.3g}"))(
            covering.h_recursion_audit(sig, 0.3, 15, 10))),
    ]
    for fam, text, g in CLEAN_SPECS:
        spec = parse(text)
        want = covering.dim_formula(fam, g)
        out.append(_timed(f"dimension scan {fam} {text}", lambda s=spec, f=fam, w=want: (lambda v: (
            abs(v - w) <= 1e-2, f"scan {v:.5f} formula {w:.5f}"))(covering.dim_upper_scan(s, f, 5e-3))))
    return out


SUITES = {
    "qn-bounds": suite_qn_bounds,
    "measure": suite_measure,
    "lambda": suite_lambda,
    "series": suite_series,
    "ratio": suite_ratio,
    "certificates": suite_certificates,
}


def run_suite(name: str, scale: float = 1.0) -> list[Check]:
    if name == "all":
        return [c for fn in SUITES.values() for c in fn(scale)]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    return SUITES[name](scale)
