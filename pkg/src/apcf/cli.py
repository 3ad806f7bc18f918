"""Command-line front end: ``python -m apcf <command> ...`` or ``apcf <command>``.

Every command builds a JSON envelope ``{command, config_hash, results,
provenance, elapsed_ms}``; ``--format csv`` and ``--format text`` render
the main table of the results instead.  Exit status is 0 on success, 1 on
domain or verification failure and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
import time
from fractions import Fraction

from . import __version__, ap, cf, construct, covering
from .errors import APCFError, NoCertificate, StageBoundViolated
from .seqspec import parse
from .verify import run_suite

FLOAT_DIGITS = 12


# --- serialisation ----------------------------------------------------------------

def to_jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        return {"num": str(x.numerator), "den": str(x.denominator)}
    if isinstance(x, int):
        # digits and denominators can be huge; JSON readers lose precision past 2^53
        return x if abs(x) < 2**53 else str(x)
    if isinstance(x, float):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return float(f"{x:.{FLOAT_DIGITS}g}")
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "__dataclass_fields__"):
        return to_jsonable({k: getattr(x, k) for k in x.__dataclass_fields__ if not k.startswith("_")})
    return str(x)


def _cell(v):
    if isinstance(v, dict) and set(v) == {"num", "den"}:
        return f"{v['num']}/{v['den']}"
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return "" if v is None else str(v)


def render(envelope: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(envelope, indent=2, sort_keys=True) + "\n"
    res = envelope["results"]
    rows = res.get("rows") if isinstance(res, dict) else None
    if fmt == "csv":
        buf = io.StringIO()
        if rows:
            cols = list(rows[0])
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([_cell(r.get(c)) for c in cols])
        else:
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            for k, v in res.items():
                w.writerow([k, _cell(v)])
        return buf.getvalue()
    lines = [f"# {envelope['command']}"]
    for k, v in res.items():
        if k == "rows":
            continue
        lines.append(f"{k}: {_cell(v)}")
    if rows:
        cols = list(rows[0])
        lines.append("\t".join(cols))
        lines += ["\t".join(_cell(r.get(c)) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".apcf-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(command: str, cfg: dict) -> str:
    blob = json.dumps({"command": command, "config": to_jsonable(cfg)}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# --- argument helpers ---------------------------------------------------------------

def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def parse_digits(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(" ", "").strip("[]()").split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated digit list: {text!r}") from None


def _spec_from(args, family=None):
    family = family or args.family
    if family is None:
        family = "F" if args.nu else "G" if args.sigma else None
    if family == "F":
        if not args.nu:
            raise UsageError("family F needs --nu")
        return "F", parse(args.nu, "nu", strict=not args.non_strict)
    if family == "G":
        if not args.sigma:
            raise UsageError("family G needs --sigma")
        return "G", parse(args.sigma, "sigma")
    raise UsageError("give --family with --nu or --sigma")


class UsageError(Exception):
    pass


def _params(args):
    family, spec = _spec_from(args)
    sched = parse_digits(args.schedule) if getattr(args, "schedule", None) else None
    cover = max(getattr(args, "depth", 1) or 1, 1)
    params = construct.make_params(family, spec, args.t, cover=cover, schedule=sched)
    return family, spec, params


# --- commands -----------------------------------------------------------------------

def cmd_expand(args):
    x = args.value
    digits = cf.expand(x)
    rows = [{"index": i, "digit": a} for i, a in enumerate(digits, 1)]
    return {"value": x, "digits": list(digits), "rows": rows}, {}


def cmd_convergents(args):
    conv = cf.convergents(args.digits)
    rows = [{"index": c.index, "p": c.p, "q": c.q} for c in conv]
    return {"digits": list(args.digits), "rows": rows}, {}


def cmd_interval(args):
    iv = cf.fundamental_interval(args.digits)
    return {
        "digits": list(args.digits),
        "lo": iv.lo,
        "hi": iv.hi,
        "length": iv.length,
        "closed_end": "lo" if iv.closed_left else "hi",
        "depth": iv.depth,
    }, {}


def cmd_detect_ap(args):
    d = args.digits
    runs = ap.find_ap_runs(d, args.min_len)
    res = {"digits": list(d), "rows": [
        {"start": r.start_index, "length": r.length, "first": r.first_value, "difference": r.difference}
        for r in runs]}
    if args.nu:
        rep = ap.check_F_membership(d, parse(args.nu, "nu", strict=not args.non_strict))
        res["F_membership"] = {"verdict": rep.verdict, "witness_positions": [w[0] for w in rep.witnesses],
                               "checked": rep.checked}
    if args.sigma:
        rep = ap.check_G_membership(d, parse(args.sigma, "sigma"), args.n_start)
        res["G_membership"] = {"verdict": rep.verdict, "first_violation": rep.first_violation,
                               "checked": rep.checked}
    return res, {}


def cmd_construct(args):
    family, spec, params = _params(args)
    d = construct.sample_point(params, args.seed, args.depth, args.mode)
    if family == "F":
        member = ap.check_F_membership(d, spec).verdict
    else:
        member = ap.check_G_membership(d, spec).verdict
    rows = [{"n": n, "digit": str(a), "free": construct.digit_window(params, n).free}
            for n, a in enumerate(d, 1)]
    res = {
        "family": family,
        "spec": spec.canonical(),
        "t": args.t,
        "digits": [str(a) for a in d],
        "strictly_increasing": cf.is_strictly_increasing(d),
        "boundary_chain": construct.boundary_chain_ok(params, d),
        "membership": member,
        "blocks": params.partition.summary(),
        "rows": rows,
    }
    return res, {"mode": args.mode, "schedule": list(params.schedule) if params.schedule else None}


def cmd_localdim(args):
    family, spec, params = _params(args)
    d = construct.sample_point(params, args.seed, args.depth, args.mode)
    rows = construct.local_dim_rows(params, d, tol=args.tol)
    checked = [r for r in rows if r["ok"] is not None]
    res = {
        "family": family,
        "spec": spec.canonical(),
        "t": args.t,
        "all_ok": all(r["ok"] for r in checked),
        "checked": len(checked),
        "rows": rows,
    }
    return res, {"tolerance": args.tol, "log_method": "leading 64 bits + bit length"}


def cmd_ratios(args):
    family, spec = _spec_from(args)
    params = construct.make_params(family, spec, args.t, k_min=args.k_max + 1)
    rs = construct.ratio_series(params, args.k_max)
    rows = []
    for i, k in enumerate(rs.k):
        rows.append({"k": k, "A": rs.A[i], "B": rs.B[i], "A_err": rs.A_err[i], "B_err": rs.B_err[i],
                     "min": min(rs.A[i], rs.B[i]), "limit_A": rs.limit_A, "limit_B": rs.limit_B})
    res = {"family": family, "spec": spec.canonical(), "t": args.t, "growth": rs.growth,
           "limit_A": rs.limit_A, "limit_B": rs.limit_B, "rows": rows}
    return res, {"error_bounds": "A_err, B_err are absolute", "schedule": list(params.schedule or [])}


def _growth(family, spec, horizon):
    g = ap.growth_constants(spec, min(horizon, 4000))
    return g.value, g


def cmd_dim(args):
    family, spec = _spec_from(args)
    growth, est = _growth(family, spec, args.horizon)
    formula = covering.dim_formula(family, growth)
    res = {"family": family, "spec": spec.canonical(), "growth": growth, "formula": formula,
           "growth_converged": est.converged}
    try:
        scan = covering.dim_upper_scan(spec, family, args.tol, args.horizon, full=True)
        res.update(scan=scan.value, agree=abs(scan.value - formula) <= 2 * args.tol,
                   certificate=_cert_dict(scan.certificate),
                   rows=[{"s": s, "accepted": ok} for s, ok in scan.evaluations])
    except NoCertificate as e:
        res.update(scan=None, agree=False, error=str(e))
    return res, {"tolerance": args.tol, "horizon": args.horizon}


def _cert_dict(c):
    return {"family": c.family, "s": c.s, "constants": c.constants, "checked_horizon": c.checked_horizon,
            "verdict": c.verdict, "reason": c.reason, "slack_at_horizon": c.slack_at_horizon,
            "slack_at_half": c.slack_at_half, "bound": c.bound}


def cmd_certificate(args):
    if args.s is None:
        raise UsageError("certificate needs --s")
    family, spec = _spec_from(args)
    s = Fraction(repr(args.s))
    try:
        cert = covering.certificate(family, spec, s, args.horizon)
    except NoCertificate as e:
        res = {"verdict": "rejected", "reason": str(e)}
        if e.attempt is not None:
            res["attempt"] = _cert_dict(e.attempt)
        return res, {"horizon": args.horizon}, 1
    res = _cert_dict(cert)
    prov = {"horizon": args.horizon}
    if family == "G":
        n0 = cert.constants["n0"]
        try:
            rows = covering.h_recursion_audit(spec, s, n0, args.stages, args.trunc)
            res["rows"] = rows
        except StageBoundViolated as e:
            res["rows"] = e.report
            res["audit_error"] = str(e)
            return res, prov, 1
        prov["trunc"] = args.trunc
    return res, prov


def cmd_verify(args):
    checks = run_suite(args.suite, args.scale)
    rows = [{"check": c.name, "ok": c.ok, "detail": c.detail, "seconds": round(c.elapsed, 3)} for c in checks]
    ok = all(c.ok for c in checks)
    return {"suite": args.suite, "all_ok": ok, "rows": rows}, {"scale": args.scale}, 0 if ok else 1


COMMANDS = {
    "expand": cmd_expand,
    "convergents": cmd_convergents,
    "interval": cmd_interval,
    "detect-ap": cmd_detect_ap,
    "construct": cmd_construct,
    "localdim": cmd_localdim,
    "ratios": cmd_ratios,
    "dim": cmd_dim,
    "certificate": cmd_certificate,
    "verify": cmd_verify,
}


# --- parser ---------------------------------------------------------------------------

def _common(p):
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--out", help="write output here (atomically) instead of stdout")
    p.add_argument("--config", help="flat key=value file; command-line flags take precedence")
    p.add_argument("--no-clock", action="store_true", help="report elapsed_ms as 0 for byte-identical output")


def _spec_flags(p):
    p.add_argument("--family", choices=("F", "G"))
    p.add_argument("--nu", help='e.g. "nu(n) = n"')
    p.add_argument("--sigma", help='e.g. "sigma(n) = n*(n+1)"')
    p.add_argument("--non-strict", action="store_true", help="allow non-decreasing nu")


def _lambda_flags(p):
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=50)
    p.add_argument("--mode", choices=("random", "min"), default="random")
    p.add_argument("--schedule", help="explicit F schedule n_1,n_2,...")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apcf", description="Continued fractions with AP digit patterns")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="continued fraction digits of a rational")
    p.add_argument("value", type=parse_rational)
    _common(p)
    for name in ("convergents", "interval"):
        p = sub.add_parser(name, help=f"{name} of a digit list")
        p.add_argument("digits", type=parse_digits)
        _common(p)

    p = sub.add_parser("detect-ap", help="AP runs and F/G membership of a digit list")
    p.add_argument("digits", type=parse_digits)
    p.add_argument("--min-len", type=int, default=3)
    p.add_argument("--n-start", type=int, default=1)
    _spec_flags(p)
    _common(p)

    for name in ("construct", "localdim"):
        p = sub.add_parser(name, help="sample a point of Lambda_t" if name == "construct"
                           else "local dimension ratios along a sample")
        _spec_flags(p)
        _lambda_flags(p)
        p.add_argument("--tol", type=float, default=1e-6)
        _common(p)

    p = sub.add_parser("ratios", help="A_k and B_k series")
    _spec_flags(p)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--k-max", type=int, default=6)
    _common(p)

    p = sub.add_parser("dim", help="closed-form dimension and certificate scan")
    _spec_flags(p)
    p.add_argument("--tol", type=float, default=5e-3)
    p.add_argument("--horizon", type=int, default=covering.DEFAULT_HORIZON)
    _common(p)

    p = sub.add_parser("certificate", help="covering certificate at a given s")
    _spec_flags(p)
    p.add_argument("--s", type=float)
    p.add_argument("--horizon", type=int, default=covering.DEFAULT_HORIZON)
    p.add_argument("--trunc", type=int, default=4000)
    p.add_argument("--stages", type=int, default=10)
    _common(p)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", nargs="?", default="all",
                   choices=("qn-bounds", "measure", "lambda", "series", "ratio", "certificates", "all"))
    p.add_argument("--scale", type=float, default=1.0, help="shrink or grow sample counts")
    _common(p)
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip().lstrip("-").replace("-", "_")] = v.strip()
    return out


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in cfg.items():
        if k not in known:
            raise UsageError(f"unknown config key {k!r} for {args.command}")
        act = known[k]
        if act.nargs == 0:
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            defaults[k] = act.type(v) if act.type else v
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"apcf: error: {e}", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        out = COMMANDS[args.command](args)
    except UsageError as e:
        print(f"apcf {args.command}: error: {e}", file=sys.stderr)
        return 2
    except APCFError as e:
        print(f"apcf {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    results, prov = out[0], out[1]
    status = out[2] if len(out) > 2 else 0
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "format", "config", "no_clock")}
    elapsed = 0 if args.no_clock else int((time.perf_counter() - t0) * 1000)
    envelope = {
        "command": args.command,
        "config_hash": config_hash(args.command, cfg),
        "results": to_jsonable(results),
        "provenance": to_jsonable({"version": __version__, "config": cfg, **prov}),
        "elapsed_ms": elapsed,
    }
    text = render(envelope, args.format)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
