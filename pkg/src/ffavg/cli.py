"""Command line entry point: ``ffavg <subcommand> [options]``.

Exit status: 0 when every check passes and every verdict agrees with the
predicted region, 1 when something fails, 2 on a configuration error.
"""
import argparse
import json
import logging
import sys
from fractions import Fraction

from . import experiments as ex
from .errors import ConfigError, FFAvgError
from .field import make_field
from .grid import parse_exponent
from .operators import (MAXIMAL, ExponentPair, maximal_bounded, measure_tag,
                        opnorm_lower_bound, predicted_exponents, region_membership,
                        suite_tags)
from .spectral import decompose, multiplier_norm, omega_sup, omega_sup_bound

log = logging.getLogger("ffavg")


def _primes(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad prime list {text!r}") from None


def _exponent(text: str):
    try:
        s = parse_exponent(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad exponent {text!r}") from None
    if s < 1:
        raise argparse.ArgumentTypeError(f"exponent must be >= 1, got {text}")
    return s


def _j(text: str):
    if text.lower() in ("all", "max", "maximal"):
        return text.lower()
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"j must be an integer or 'all', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffavg",
        description="Averaging and maximal operators over product varieties in F_q^d.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, many_primes=True, pairs=True, extremizer=True, out=True):
        p.add_argument("--d", type=int, default=2, help="dimension (default 2)")
        if many_primes:
            p.add_argument("--primes", type=_primes, help="comma separated odd primes")
            p.add_argument("--q", type=int, help="a single prime (same as --primes q)")
        else:
            p.add_argument("--q", type=int, required=True)
        p.add_argument("--j", type=_j, default="all", help="unit j, or 'all'")
        if pairs:
            p.add_argument("--p", type=_exponent, action="append",
                           help="input exponent, e.g. 3/2 or inf; repeatable")
            p.add_argument("--r", type=_exponent, action="append",
                           help="output exponent paired with the matching --p")
        if extremizer:
            p.add_argument("--extremizer", action="append",
                           help="test function tag or 'suite' (default); repeatable")
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol-abs", type=float, default=1e-6)
        p.add_argument("--tol-rel", type=float, default=1e-6)
        if out:
            p.add_argument("--out", help="write the report to this file")
            p.add_argument("--format", choices=("csv", "json"), default="json")

    common(sub.add_parser("verify-fourier", help="check the Fourier formula, decay and decomposition"),
           pairs=False, extremizer=False)
    dec = sub.add_parser("decompose", help="split dmu_j into Omega_j and the N_k tail")
    common(dec, many_primes=False, pairs=False, extremizer=False, out=False)
    dec.add_argument("--format", choices=("text", "json"), default="text")
    rat = sub.add_parser("ratio", help="norm ratios of test functions for one q")
    common(rat, many_primes=False, out=False)
    rat.add_argument("--budget", type=int, default=0,
                     help="coordinate-ascent steps for the operator norm lower bound")
    common(sub.add_parser("sweep-averaging", help="prime sweep for A_j"))
    common(sub.add_parser("sweep-maximal", help="prime sweep for the maximal operator"))
    reg = sub.add_parser("region", help="exact region membership and predicted growth")
    reg.add_argument("--d", type=int, default=2)
    reg.add_argument("--p", type=_exponent, required=True)
    reg.add_argument("--r", type=_exponent)
    return parser


def _pairs(args, maximal=False):
    ps = args.p or []
    rs = args.r or []
    if maximal:
        if rs and rs != ps:
            raise ConfigError("the maximal operator uses r = p; omit --r")
        return tuple(ExponentPair.from_exponents(p, p) for p in ps)
    if len(ps) != len(rs):
        raise ConfigError("every --p needs a matching --r")
    return tuple(ExponentPair.from_exponents(p, r) for p, r in zip(ps, rs))


def _default_pairs(d: int, maximal: bool):
    if maximal:
        return (ExponentPair(Fraction(d - 1, d), Fraction(d - 1, d)), ExponentPair(1, 1))
    vertex = ExponentPair(Fraction(d, d + 1), Fraction(1, d + 1))
    return (vertex, ExponentPair(1, 1), ExponentPair(0, 0))


def _sweep_config(args, mode: str) -> ex.SweepConfig:
    if args.primes and args.q:
        raise ConfigError("give --primes or --q, not both")
    primes = args.primes or ((args.q,) if args.q else ex.default_primes(args.d))
    maximal = mode == "maximal"
    pairs = ()
    if mode != "fourier":
        pairs = _pairs(args, maximal) or _default_pairs(args.d, maximal)
    extremizers = tuple(getattr(args, "extremizer", None) or ("suite",))
    if args.j in ("max", "maximal"):
        raise ConfigError("use sweep-maximal for the maximal operator")
    return ex.SweepConfig(primes=primes, d=args.d, pairs=pairs, extremizers=extremizers,
                          mode=mode, j_policy=args.j, seed=getattr(args, "seed", 0),
                          tol_abs=args.tol_abs, tol_rel=args.tol_rel,
                          out=args.out, fmt=args.format)


def _finish(report: ex.SweepReport, cfg: ex.SweepConfig) -> int:
    text = ex.emit_report(report, cfg.fmt, cfg.out)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        for v in report.verdicts:
            log.info("%s", v)
        print(f"wrote {cfg.out}: {len(report.rows)} rows, {len(report.verdicts)} verdicts, "
              f"{len(report.check_failures)} check failures")
    for f in report.check_failures:
        print(f"CHECK FAILED: {f.as_dict()}", file=sys.stderr)
    for v in report.verdicts:
        if v.get("matches") is False:
            print(f"VERDICT MISMATCH: {v}", file=sys.stderr)
    return report.exit_code


def cmd_verify_fourier(args) -> int:
    cfg = _sweep_config(args, "fourier")
    return _finish(ex.run_verify_fourier(cfg), cfg)


def cmd_sweep(args, mode) -> int:
    cfg = _sweep_config(args, mode)
    return _finish(ex.run_sweep(cfg), cfg)


def cmd_decompose(args) -> int:
    ctx = make_field(args.q)
    js = list(ctx.units) if args.j == "all" else [args.j]
    records, code = [], 0
    for j in js:
        dec = decompose(ctx, args.d, j)
        rec = {"q": args.q, "d": args.d, "j": dec.j, "residual": dec.residual,
               "tail_coefficients": [str(c) for c in dec.tail_coefficients],
               "omega_sup": None, "omega_sup_bound": omega_sup_bound(args.q, args.d),
               "omega_l2_norm": multiplier_norm(dec)}
        try:
            rec["omega_sup"] = omega_sup(dec)
        except FFAvgError as e:
            print(f"CHECK FAILED: {e}", file=sys.stderr)
            rec["omega_sup"] = e.violation.value
            code = 1
        if dec.residual > args.tol_abs * args.q:
            print(f"CHECK FAILED: decomposition residual {dec.residual}", file=sys.stderr)
            code = 1
        records.append(rec)
    if args.format == "json":
        print(json.dumps(ex._round12(records), indent=2, sort_keys=True))
    else:
        for rec in records:
            print(f"j={rec['j']}  residual={ex.fmt_float(rec['residual'])}  "
                  f"omega_sup={ex.fmt_float(rec['omega_sup'])} (bound {ex.fmt_float(rec['omega_sup_bound'])})  "
                  f"L2 multiplier={ex.fmt_float(rec['omega_l2_norm'])}  "
                  f"tail=({', '.join(rec['tail_coefficients'])})")
    return code


def cmd_ratio(args) -> int:
    ctx = make_field(args.q)
    if args.j in ("max", "maximal"):
        target = MAXIMAL
    elif args.j == "all":
        raise ConfigError("ratio needs a single --j (or --j max)")
    else:
        target = args.j
    pairs = _pairs(args, target == MAXIMAL) or _default_pairs(args.d, target == MAXIMAL)
    tags = []
    for t in args.extremizer or ["suite"]:
        tags += suite_tags(target == MAXIMAL, args.seed) if t == "suite" else [t]
    w = ex.csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["q", "d", "j", "inv_p", "inv_r", "extremizer", "ratio"])
    for pr in pairs:
        for tag in dict.fromkeys(tags):
            m = measure_tag(ctx, args.d, target, pr, tag)
            w.writerow([m.q, m.d, m.j, m.exponents.inv_p, m.exponents.inv_r, tag, ex.fmt_float(m.ratio)])
        if args.budget > 0:
            best, tag = opnorm_lower_bound(ctx, args.d, target, pr, args.budget, args.seed)
            w.writerow([args.q, args.d, target, pr.inv_p, pr.inv_r if target != MAXIMAL else pr.inv_p,
                        f"lower_bound[{tag}]", ex.fmt_float(best)])
    return 0


def cmd_region(args) -> int:
    r = args.r if args.r is not None else args.p
    pr = ExponentPair.from_exponents(args.p, r)
    single, maximal = predicted_exponents(args.d, pr)
    print(f"d={args.d} 1/p={pr.inv_p} 1/r={pr.inv_r}")
    print(f"in_region={region_membership(args.d, pr)}")
    print(f"maximal_bounded={maximal_bounded(args.d, pr)}")
    print(f"delta_growth={single}")
    print(f"adjoint_delta_growth={predicted_exponents(args.d, pr.adjoint())[0]}")
    print(f"maximal_growth={maximal}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {
        "verify-fourier": cmd_verify_fourier,
        "decompose": cmd_decompose,
        "ratio": cmd_ratio,
        "sweep-averaging": lambda a: cmd_sweep(a, "averaging"),
        "sweep-maximal": lambda a: cmd_sweep(a, "maximal"),
        "region": cmd_region,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except FFAvgError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1 if not isinstance(e, ValueError) else 2


if __name__ == "__main__":
    sys.exit(main())
