"""Command-line entry point.

Exit codes: 0 pass (or informational), 1 fail, 2 usage error, 3 constraint
violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .arith import convolution_g, dirichlet_convolve, liouville, turan_identity_check
from .asymptotics import DEFAULT_C1, AsymptoticConstants, estimate_C0, large_x_bound
from .bounds import DEFAULT_ZETA_CUTOFF, BoundParams, verify_bound
from .errors import CmfBoundsError, ConstraintError
from .numerics import format_log10
from .optimize import OPTIMIZER_ZETA_CUTOFF, SearchSpec, random_descent
from .primes import MAX_SIEVE_LIMIT, sieve
from .simulation import (
    DEFAULT_CAP,
    decomposition_residual,
    empirical_moment,
    etemadi_empirical,
    positivity_trials,
    sample_cmf,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_CONSTRAINT = 0, 1, 2, 3


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _num(text: str) -> float:
    """Float parser accepting forms like 1e12."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def _int(text: str) -> int:
    v = _num(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def _positive_int(text: str) -> int:
    v = _int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--out", metavar="PATH", help="write the report to PATH instead of stdout")
    p.add_argument("--sieve-limit", type=_positive_int, default=None, help="prime table size")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads for trial loops")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="cmfbounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    d = BoundParams()
    v = sub.add_parser("verify", parents=[common], help="evaluate the total failure bound")
    v.add_argument("--lambda", dest="lam", type=_num, default=d.lam)
    v.add_argument("--delta", type=_num, default=d.delta)
    v.add_argument("--k", type=_int, default=d.k)
    v.add_argument("--sigma", type=_num, default=d.sigma)
    v.add_argument("--R", type=_int, default=d.R)
    v.add_argument("--ell", type=_num, default=d.ell)
    v.add_argument("--zeta-cutoff", type=_int, default=DEFAULT_ZETA_CUTOFF)

    o = sub.add_parser("optimize", parents=[common], help="random descent on the total bound")
    o.add_argument("--seed", type=_int, default=1)
    o.add_argument("--iters", type=_positive_int, default=2000)
    o.add_argument("--init-lambda", dest="init_lam", type=_num, default=d.lam)
    o.add_argument("--init-delta", type=_num, default=d.delta)
    o.add_argument("--init-k", type=_int, default=d.k)
    o.add_argument("--init-sigma", type=_num, default=d.sigma)
    o.add_argument("--init-R", type=_int, default=d.R)
    o.add_argument("--init-ell", type=_num, default=d.ell)
    o.add_argument("--free-ell", action="store_true", help="let ell move too")
    o.add_argument("--lambda-cap", type=_num, default=1e4)
    o.add_argument("--R-cap", type=_positive_int, default=10**5)
    o.add_argument("--zeta-cutoff", type=_int, default=OPTIMIZER_ZETA_CUTOFF)

    s = sub.add_parser("simulate", help="Monte Carlo and enumeration experiments")
    ssub = s.add_subparsers(dest="experiment", required=True)
    sp = ssub.add_parser("positivity", parents=[common])
    sp.add_argument("--trials", type=_positive_int, default=1000)
    sp.add_argument("--xmax", type=_positive_int, default=10**6)
    sp.add_argument("--seed", type=_int, default=7)
    sp.add_argument("--csv", action="store_true", help="per-trial rows trial,seed,statistic")
    sd = ssub.add_parser("decomp", parents=[common])
    sd.add_argument("--x", type=_positive_int, default=10)
    sd.add_argument("--cap", type=_num, default=DEFAULT_CAP)
    sd.add_argument("--seed", type=_int, default=7)
    sm = ssub.add_parser("moment", parents=[common])
    sm.add_argument("--x", type=_positive_int, default=10)
    sm.add_argument("--k", type=_positive_int, default=1)
    sm.add_argument("--trials", type=_positive_int, default=100_000)
    sm.add_argument("--seed", type=_int, default=7)
    sm.add_argument("--cap", type=_num, default=DEFAULT_CAP)
    sm.add_argument("--sigma", type=_num, default=1.5)
    sm.add_argument("--csv", action="store_true", help="per-trial rows trial,seed,statistic")
    se = ssub.add_parser("etemadi", parents=[common])
    se.add_argument("--n", type=_positive_int, default=20)
    se.add_argument("--alpha", type=_num, default=0.05)
    se.add_argument("--mode", choices=["exact", "mc"], default="exact")
    se.add_argument("--trials", type=_positive_int, default=100_000)
    se.add_argument("--seed", type=_int, default=7)
    se.add_argument("--window", nargs=2, type=_positive_int, metavar=("LO", "HI"),
                    help="use steps 1/p for primes LO < p <= HI instead of unit steps")

    a = sub.add_parser("asym", parents=[common], help="large-x bound at the scheduled parameters")
    a.add_argument("--x", type=_num, default=1e100)
    a.add_argument("--C1", type=_num, default=DEFAULT_C1)
    a.add_argument("--C0", type=_num, default=None, help="default: estimated from primes")

    pr = sub.add_parser("primes", help="prime table queries")
    prsub = pr.add_subparsers(dest="action", required=True)
    pc = prsub.add_parser("count", parents=[common])
    pc.add_argument("--limit", type=_int, required=True)

    c = sub.add_parser("convolution-check", parents=[common], help="check g = f*|mu| and f = g*lambda")
    c.add_argument("--seed", type=_int, default=0)
    c.add_argument("--limit", type=_int, default=10**4)
    c.add_argument("--x", type=_positive_int, default=None, help="identity check point, default min(limit, 1000)")
    return parser


# -- handlers: each returns (exit status, report dict, human text) ----------

def _cmd_verify(args) -> tuple[int, dict, str]:
    params = BoundParams(args.lam, args.delta, args.k, args.sigma, args.R, args.ell)
    for name, ok in params.constraints():
        if not ok:
            raise ConstraintError(name)
    if args.zeta_cutoff < 2:
        raise ConstraintError("zeta_cutoff>=2")
    t0 = time.perf_counter()
    table = sieve(args.sieve_limit or max(int(math.ceil(10 * params.lam)), params.R, 2), MAX_SIEVE_LIMIT)
    rep = verify_bound(params, table, args.zeta_cutoff)
    out = rep.to_dict()
    out["version"] = __version__
    out["zeta_cutoff"] = args.zeta_cutoff
    lines = [
        f"parameters: lambda={params.lam} delta={params.delta} k={params.k} sigma={params.sigma} "
        f"R={params.R} ell={params.ell}",
        f"  Euler product term  <= {format_log10(rep.log10_product_bound)}",
        f"  drift term          <= {format_log10(rep.log10_drift_bound)}",
        f"  smooth tail term    <= {format_log10(rep.log10_tail_bound)}",
        f"  total               <= {format_log10(rep.log10_total)}",
        f"  product <= 5e-46: {rep.pass_product}   tail <= 5e-46: {rep.pass_tail}   "
        f"total <= 1e-45: {rep.pass_total}",
        f"  ({time.perf_counter() - t0:.2f} s)",
    ]
    ok = rep.pass_product and rep.pass_tail and rep.pass_total
    return (EXIT_PASS if ok else EXIT_FAIL), out, "\n".join(lines)


def _cmd_optimize(args) -> tuple[int, dict, str]:
    init = BoundParams(args.init_lam, args.init_delta, args.init_k, args.init_sigma, args.init_R, args.init_ell)
    for name, ok in init.constraints():
        if not ok:
            raise ConstraintError(name)
    spec = SearchSpec(
        initial=init,
        iterations=args.iters,
        seed=args.seed,
        free_ell=args.free_ell,
        lam_cap=args.lambda_cap,
        R_cap=args.R_cap,
    )
    limit = args.sieve_limit or int(max(10 * max(args.lambda_cap, init.lam), args.R_cap, init.R))
    res = random_descent(spec, sieve(limit), args.zeta_cutoff)
    best = res.best.to_dict()
    best.pop("N0")
    out = {
        "version": __version__,
        "params": {"seed": args.seed, "iters": args.iters, "initial": init.to_dict(),
                   "free_ell": args.free_ell, "zeta_cutoff": args.zeta_cutoff},
        "best": best,
        "log10_objective": res.best_value.log10,
        "accepted_steps": res.accepted_steps,
        "trace": [[i, v] for i, v in res.trace],
    }
    text = (f"best after {args.iters} iterations ({res.accepted_steps} accepted): "
            f"{best}\n  objective <= {format_log10(res.best_value.log10)}")
    return EXIT_PASS, out, text


def _experiment_output(rep, args, extra_params: dict) -> tuple[int, dict, str]:
    out = rep.to_dict()
    out["version"] = __version__
    out["params"] = extra_params
    if getattr(args, "csv", False):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "seed", "statistic"])
        w.writerows(rep.rows)
        return (EXIT_PASS if rep.passed else EXIT_FAIL), out, buf.getvalue().rstrip("\n")
    stats = ", ".join(f"{k}={v}" for k, v in rep.stats.items())
    return (EXIT_PASS if rep.passed else EXIT_FAIL), out, f"{rep.name}: pass={bool(rep.passed)}  {stats}"


def _cmd_simulate(args) -> tuple[int, dict, str]:
    exp = args.experiment
    if exp == "positivity":
        table = sieve(max(args.sieve_limit or args.xmax, 2))
        rep = positivity_trials(args.trials, args.xmax, args.seed, table, threads=args.threads)
        params = {"trials": args.trials, "xmax": args.xmax, "seed": args.seed}
    elif exp == "decomp":
        if not 2 <= args.x <= 30:
            raise ConstraintError("2<=x<=30")
        if not args.cap > args.x:
            raise ConstraintError("cap>x")
        table = sieve(max(args.sieve_limit or args.x, 2))
        rep = decomposition_residual(sample_cmf(args.seed, args.x, args.x, table), args.x, args.cap)
        params = {"x": args.x, "cap": args.cap, "seed": args.seed}
    elif exp == "moment":
        if not 2 <= args.x <= 30:
            raise ConstraintError("2<=x<=30")
        if args.k not in (1, 2):
            raise ConstraintError("k in {1,2}")
        table = sieve(max(args.sieve_limit or args.x, 2))
        rep = empirical_moment(args.x, args.k, args.trials, args.seed, args.cap, table, args.sigma)
        params = {"x": args.x, "k": args.k, "trials": args.trials, "seed": args.seed,
                  "cap": args.cap, "sigma": args.sigma}
    else:
        steps = None
        if args.window:
            lo, hi = args.window
            ps = sieve(max(hi, 2)).primes_upto(hi)
            steps = 1.0 / ps[ps > lo]
            if steps.size == 0:
                raise ConstraintError("window contains primes")
        if args.mode == "exact" and (steps.size if steps is not None else args.n) > 30:
            raise ConstraintError("n<=30 in exact mode")
        if args.alpha < 0:
            raise ConstraintError("alpha>=0")
        rep = etemadi_empirical(args.n, args.alpha, args.trials, args.seed, args.mode, steps)
        params = {"n": rep.stats["n"], "alpha": args.alpha, "mode": args.mode,
                  "trials": args.trials, "seed": args.seed, "window": args.window}
    return _experiment_output(rep, args, params)


def _cmd_asym(args) -> tuple[int, dict, str]:
    if args.x < 1e6:
        raise ConstraintError("x>=1e6")
    table = sieve(args.sieve_limit or 10**5)
    C0 = args.C0 if args.C0 is not None else estimate_C0(table)
    res = large_x_bound(args.x, AsymptoticConstants(C0=C0, C1=args.C1), table)
    out = res.to_dict()
    out["version"] = __version__
    lines = [
        f"x={args.x:g}: k={res.schedule.k} delta={res.schedule.delta:.6g} sigma={res.schedule.sigma:.6g}",
        f"  product term <= 10^{res.product.bound.log10:.6g}",
        f"  tail term    <= 10^{res.tail_display.log10:.6g}",
        f"  total        <= 10^{res.total.log10:.6g}   implied C = {res.implied_C}",
        *[f"  note: {n}" for n in res.notes],
    ]
    return EXIT_PASS, out, "\n".join(lines)


def _cmd_primes(args) -> tuple[int, dict, str]:
    if not 2 <= args.limit <= MAX_SIEVE_LIMIT:
        raise ConstraintError(f"2<=limit<={MAX_SIEVE_LIMIT}")
    pi = int(sieve(args.limit).primes.size)
    return EXIT_PASS, {"limit": args.limit, "pi": pi, "version": __version__}, f"pi({args.limit}) = {pi}"


def _cmd_convolution(args) -> tuple[int, dict, str]:
    if not 2 <= args.limit <= 10**6:
        raise ConstraintError("2<=limit<=1e6")
    x = args.x or min(args.limit, 1000)
    if x > args.limit:
        raise ConstraintError("x<=limit")
    table = sieve(args.limit)
    f = sample_cmf(args.seed, args.limit, args.limit, table).as_sequence()
    g = convolution_g(f, args.limit, table)
    nonneg = bool(np.all(g.values[1:] >= 0))
    gl = dirichlet_convolve(g, liouville(args.limit, table), args.limit)
    exact = bool(np.array_equal(gl.values, f.values))
    pp = np.ones(args.limit + 1, dtype=bool)
    for p in table.primes_upto(args.limit).tolist():
        q = p
        while q <= args.limit:
            pp[q] = g.values[q] in (0, 2)
            q *= p
    prime_powers_ok = bool(pp.all())
    residual = turan_identity_check(f, x, table)
    out = {
        "g_nonnegative": nonneg,
        "g_star_lambda_equals_f": exact,
        "identity_residual": residual,
        "g_prime_powers_in_0_2": prime_powers_ok,
        "version": __version__,
        "params": {"seed": args.seed, "limit": args.limit, "x": x},
    }
    ok = nonneg and exact and prime_powers_ok and residual <= 1e-10 * x
    text = (f"g >= 0: {nonneg}   g*lambda == f: {exact}   g(p^j) in {{0,2}}: {prime_powers_ok}   "
            f"identity residual at x={x}: {residual:.3g}")
    return (EXIT_PASS if ok else EXIT_FAIL), out, text


HANDLERS = {
    "verify": _cmd_verify,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "asym": _cmd_asym,
    "primes": _cmd_primes,
    "convolution-check": _cmd_convolution,
}


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    try:
        status, report, text = HANDLERS[args.command](args)
    except ConstraintError as e:
        msg = {"error": "constraint", "constraint": e.constraint, "message": str(e), "version": __version__}
        print(f"constraint violated: {e.constraint}", file=sys.stderr)
        if getattr(args, "json", False):
            print(json.dumps(msg), file=stdout)
        return EXIT_CONSTRAINT
    except CmfBoundsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONSTRAINT
    if args.json and not getattr(args, "csv", False):
        rendered = json.dumps(report, default=_json_default, indent=2)
    else:
        rendered = text
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(rendered + "\n")
    else:
        print(rendered, file=stdout)
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
