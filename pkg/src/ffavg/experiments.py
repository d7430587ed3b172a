"""Verification runs and prime sweeps, slope fitting and report output."""
import csv
import io
import json
import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (BoundViolation, BoundViolationError, ConfigError, DegenerateFit,
                     IoError)
from .field import is_prime, make_field
from .grid import MAX_GRID_POINTS, lp_norm
from .operators import (MAXIMAL, ExponentPair, RatioMeasurement, adjoint_delta_ratio, average, extremizer,
                        maximal_average, maximal_bounded, predicted_growth,
                        region_membership, resolve_tag, suite_tags)
from .spectral import (decay_bound, decay_certificate, decompose, multiplier_norm,
                       nk_hat_norm, omega_sup, spectral_table)

log = logging.getLogger(__name__)

BOUNDED_SLOPE = 0.1
UNBOUNDED_MARGIN = 0.15
RATIO_CAP = 4.0

DEFAULT_PRIMES = {
    1: (5, 7, 11, 13, 17, 19, 23, 29, 31),
    2: (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61),
    3: (5, 7, 11, 13, 17, 19, 23, 29, 31),
    4: (5, 7, 11, 13, 17, 19),
}


def default_primes(d: int) -> tuple:
    if d in DEFAULT_PRIMES:
        return DEFAULT_PRIMES[d]
    return tuple(q for q in range(5, 64) if is_prime(q) and q ** d <= MAX_GRID_POINTS)


def worker_count() -> int:
    env = os.environ.get("FFAVG_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FFAVG_THREADS must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)


@dataclass
class SweepConfig:
    primes: tuple
    d: int
    pairs: tuple = ()
    extremizers: tuple = ("suite",)
    mode: str = "averaging"
    j_policy: object = "all"
    seed: int = 0
    tol_abs: float = 1e-6
    tol_rel: float = 1e-6
    out: str | None = None
    fmt: str = "json"

    def validate(self) -> "SweepConfig":
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        if not self.primes:
            raise ConfigError("at least one prime is required")
        if len(set(self.primes)) != len(self.primes):
            raise ConfigError("primes must be distinct")
        for q in self.primes:
            if q < 3 or not is_prime(q):
                raise ConfigError(f"{q} is not an odd prime")
            if q ** self.d > MAX_GRID_POINTS:
                raise ConfigError(f"q^d = {q}^{self.d} exceeds {MAX_GRID_POINTS}")
        if self.mode not in ("averaging", "maximal", "fourier"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.j_policy != "all":
            try:
                j = int(self.j_policy)
            except (TypeError, ValueError):
                raise ConfigError(f"j must be an integer or 'all', got {self.j_policy!r}") from None
            for q in self.primes:
                if j % q == 0:
                    raise ConfigError(f"j={j} vanishes mod {q}")
            self.j_policy = j
        if self.mode != "fourier" and not self.pairs:
            raise ConfigError("no exponent pairs given")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.mode == "maximal" and "adjoint_delta_zero" in self.extremizers:
            raise ConfigError("adjoint_delta_zero is not defined for the maximal operator")
        self.primes = tuple(sorted(int(q) for q in self.primes))
        return self

    def js(self, q: int) -> list:
        if self.j_policy == "all":
            return list(range(1, q))
        return [int(self.j_policy) % q]

    def tags(self) -> list:
        tags = []
        for t in self.extremizers:
            if t == "suite":
                tags += suite_tags(self.mode == "maximal", self.seed)
            else:
                tags.append(t)
        return list(dict.fromkeys(tags))

    def as_dict(self) -> dict:
        return {
            "primes": list(self.primes), "d": self.d, "mode": self.mode,
            "pairs": [[str(p.inv_p), str(p.inv_r)] for p in self.pairs],
            "extremizers": list(self.extremizers), "j_policy": self.j_policy,
            "seed": self.seed, "tol_abs": self.tol_abs, "tol_rel": self.tol_rel,
        }


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    residual: float


def fit_slope(points) -> SlopeFit:
    """Least squares line through (log q, log ratio); residual is the RMS misfit."""
    pts = list(points)
    if len(pts) < 3:
        raise DegenerateFit(f"need at least 3 points, got {len(pts)}")
    q = np.array([p[0] for p in pts], dtype=float)
    r = np.array([p[1] for p in pts], dtype=float)
    if np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise DegenerateFit("ratios must be positive and finite")
    if np.unique(q).size < 2:
        raise DegenerateFit("need at least two distinct q")
    x, y = np.log(q), np.log(r)
    A = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((y - A @ np.array([slope, intercept])) ** 2)))
    return SlopeFit(float(slope), float(intercept), resid)


@dataclass
class SweepReport:
    config: dict
    rows: list = field(default_factory=list)
    fitted_slopes: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    check_failures: list = field(default_factory=list)
    fourier: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if self.check_failures:
            return 1
        if any(v.get("matches") is False for v in self.verdicts):
            return 1
        return 0

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": [_row_dict(r) for r in self.rows],
            "fitted_slopes": self.fitted_slopes,
            "verdicts": self.verdicts,
            "check_failures": [v.as_dict() for v in self.check_failures],
            "fourier": self.fourier,
        }


def _row_dict(r) -> dict:
    return {"q": r.q, "d": r.d, "mode": r.mode, "j": r.j,
            "inv_p": str(r.exponents.inv_p), "inv_r": str(r.exponents.inv_r),
            "extremizer": r.extremizer_tag, "ratio": r.ratio}


# -- verify-fourier -------------------------------------------------------

def _fourier_instance(cfg: SweepConfig, q: int, j: int):
    ctx, d = make_field(q), cfg.d
    failures = []
    table = spectral_table(ctx, d, j)
    if table.closed_form_residual > cfg.tol_abs:
        failures.append(BoundViolation("closed_form", q, d, j, table.closed_form_residual, cfg.tol_abs))
    try:
        decay_max, constant = decay_certificate(table, cfg.tol_abs)
    except BoundViolationError as e:
        failures.append(e.violation)
        decay_max, constant = table.decay_max, table.decay_max * q ** ((d - 1) / 2)
    dec = decompose(ctx, d, j)
    if dec.residual > cfg.tol_abs * q:
        failures.append(BoundViolation("decomposition", q, d, j, dec.residual, cfg.tol_abs * q))
    try:
        osup = omega_sup(dec)
    except BoundViolationError as e:
        failures.append(e.violation)
        osup = e.violation.value
    l2 = multiplier_norm(dec)
    if l2 > decay_bound(q, d) * (1 + cfg.tol_rel) + cfg.tol_abs:
        failures.append(BoundViolation("omega_l2", q, d, j, l2, decay_bound(q, d)))
    s = Fraction(d + 1, 2)
    nk_norms = []
    for k in range(1, d + 1):
        try:
            nk_norms.append(nk_hat_norm(ctx, d, k, s))
        except BoundViolationError as e:
            failures.append(e.violation)
            nk_norms.append(e.violation.value)
    record = {
        "q": q, "d": d, "j": j,
        "closed_form_residual": table.closed_form_residual,
        "decay_max": decay_max, "decay_constant": constant, "decay_bound": decay_bound(q, d),
        "decomposition_residual": dec.residual,
        "tail_coefficients": [str(c) for c in dec.tail_coefficients],
        "omega_sup": osup, "omega_sup_over_q": osup / q,
        "omega_l2_norm": l2,
        "nk_hat_norms": nk_norms,
    }
    return record, failures


def run_verify_fourier(config: SweepConfig) -> SweepReport:
    cfg = config
    cfg.mode = "fourier"
    cfg.validate()
    tasks = [(q, j) for q in cfg.primes for j in cfg.js(q)]
    with ThreadPoolExecutor(worker_count()) as pool:
        results = list(pool.map(lambda t: _fourier_instance(cfg, *t), tasks))
    report = SweepReport(cfg.as_dict())
    for record, failures in results:
        report.fourier.append(record)
        report.check_failures.extend(failures)
    # growth of the normalized constants is informational; the explicit
    # per-instance bounds above are the pass/fail checks
    if len(cfg.primes) >= 3:
        for key in ("omega_sup_over_q", "decay_constant"):
            per_q = defaultdict(float)
            for rec in report.fourier:
                per_q[rec["q"]] = max(per_q[rec["q"]], rec[key])
            fit = fit_slope(sorted(per_q.items()))
            report.fitted_slopes.append({"quantity": key, "slope": fit.slope,
                                         "intercept": fit.intercept, "residual": fit.residual})
    return report


# -- scaling sweeps ---------------------------------------------------------

def _sweep_unit(cfg: SweepConfig, q: int, j, tag: str) -> list:
    """All rows for one (q, j, test function); the operator output is shared by every pair."""
    ctx, d = make_field(q), cfg.d
    rows = []
    if tag == "adjoint_delta_zero":
        for pr in cfg.pairs:
            rows.append(adjoint_delta_ratio(ctx, d, j, pr))
        return rows
    f = extremizer(ctx, d, resolve_tag(ctx, d, j, tag))
    out = maximal_average(f) if j == MAXIMAL else average(f, j)
    for pr in cfg.pairs:
        if j == MAXIMAL:
            pr = ExponentPair(pr.inv_p, pr.inv_p)
        ratio = lp_norm(out, pr.r).value / lp_norm(f, pr.p).value
        rows.append(RatioMeasurement(q, d, j, pr, tag, ratio))
    return rows


def run_sweep(config: SweepConfig) -> SweepReport:
    cfg = config.validate()
    maximal = cfg.mode == "maximal"
    if maximal:
        cfg.pairs = tuple(dict.fromkeys(ExponentPair(p.inv_p, p.inv_p) for p in cfg.pairs))
    tags = cfg.tags()
    tasks = []
    for q in cfg.primes:
        targets = [MAXIMAL] if maximal else cfg.js(q)
        for j in targets:
            for tag in tags:
                tasks.append((q, j, tag))
    log.info("sweep: %d units on %d workers", len(tasks), worker_count())
    with ThreadPoolExecutor(worker_count()) as pool:
        chunks = list(pool.map(lambda t: _sweep_unit(cfg, *t), tasks))
    report = SweepReport(cfg.as_dict())
    for chunk in chunks:
        report.rows.extend(chunk)
    _fit_and_judge(cfg, report, tags)
    return report


def _fit_and_judge(cfg: SweepConfig, report: SweepReport, tags: list) -> None:
    maximal = cfg.mode == "maximal"
    # worst case over j at each q: the bounds in question are uniform in j
    worst = defaultdict(dict)
    for r in report.rows:
        key = (r.exponents, r.extremizer_tag)
        worst[key][r.q] = max(worst[key].get(r.q, 0.0), r.ratio)
    if len(cfg.primes) < 3:
        return
    for pr in cfg.pairs:
        expected_bounded = maximal_bounded(cfg.d, pr) if maximal else region_membership(cfg.d, pr)
        probe = deciding_probe(cfg.d, pr, tags, maximal)
        for tag in tags:
            per_q = sorted(worst[(pr, tag)].items())
            entry = {"inv_p": str(pr.inv_p), "inv_r": str(pr.inv_r), "extremizer": tag}
            try:
                fit = fit_slope(per_q)
            except DegenerateFit as e:
                report.fitted_slopes.append({**entry, "error": str(e)})
                continue
            tail = fit_slope(per_q[len(per_q) // 2:]).slope if len(per_q) >= 6 else None
            max_ratio = max(r for _, r in per_q)
            report.fitted_slopes.append({**entry, "slope": fit.slope, "intercept": fit.intercept,
                                         "residual": fit.residual, "tail_slope": tail,
                                         "max_ratio": max_ratio})
            predicted = predicted_growth(cfg.d, pr, tag, maximal)
            verdict = classify(fit.slope, predicted, tail)
            if expected_bounded:
                matches = verdict == "bounded" and max_ratio <= RATIO_CAP
            elif tag == probe:
                matches = (verdict == "unbounded"
                           and abs(fit.slope - float(predicted)) <= UNBOUNDED_MARGIN)
            else:
                matches = None
            report.verdicts.append({
                **entry, "slope": fit.slope, "tail_slope": tail, "max_ratio": max_ratio,
                "predicted": None if predicted is None else str(predicted),
                "in_region": expected_bounded,
                "expected": "bounded" if expected_bounded else "unbounded",
                "verdict": verdict, "matches": matches,
            })


def deciding_probe(d: int, pr: ExponentPair, tags: list, maximal: bool):
    """The delta_0-type test function whose predicted growth is largest, if positive."""
    best, best_growth = None, Fraction(0)
    for tag in ("delta_zero", "adjoint_delta_zero"):
        if tag not in tags:
            continue
        g = predicted_growth(d, pr, tag, maximal)
        if g is not None and g > best_growth:
            best, best_growth = tag, g
    return best


def classify(slope: float, predicted, tail_slope=None) -> str:
    """'bounded' when the slope over all primes, or over the larger half of
    them, is at most 0.1; 'unbounded' when it reaches predicted - 0.15."""
    if slope <= BOUNDED_SLOPE or (tail_slope is not None and tail_slope <= BOUNDED_SLOPE):
        return "bounded"
    if predicted is not None and predicted > 0 and slope >= float(predicted) - UNBOUNDED_MARGIN:
        return "unbounded"
    return "inconclusive"


# -- output -----------------------------------------------------------------

CSV_HEADER = ["q", "d", "mode", "j", "p_num", "p_den", "r_num", "r_den", "extremizer", "ratio"]


def fmt_float(x: float) -> str:
    return format(x, ".12g")


def _round12(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        return float(fmt_float(obj))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _exponent_fields(inv: Fraction):
    """An exponent p = 1/inv as (numerator, denominator); infinity is 1/0."""
    return inv.denominator, inv.numerator


def render_report(report: SweepReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_round12(report.to_dict()), indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ConfigError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.fourier and not report.rows:
        keys = ["q", "d", "j", "closed_form_residual", "decay_max", "decay_constant",
                "decay_bound", "decomposition_residual", "omega_sup", "omega_sup_over_q",
                "omega_l2_norm"]
        w.writerow(keys)
        for rec in report.fourier:
            w.writerow([fmt_float(rec[k]) if isinstance(rec[k], float) else rec[k] for k in keys])
        return buf.getvalue()
    w.writerow(CSV_HEADER)
    for r in report.rows:
        p_num, p_den = _exponent_fields(r.exponents.inv_p)
        r_num, r_den = _exponent_fields(r.exponents.inv_r)
        w.writerow([r.q, r.d, r.mode, r.j, p_num, p_den, r_num, r_den,
                    r.extremizer_tag, fmt_float(r.ratio)])
    return buf.getvalue()


def emit_report(report: SweepReport, fmt: str, path=None) -> str:
    """Render the report; write it to ``path`` when given. Returns the text."""
    text = render_report(report, fmt)
    if path is not None:
        try:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as e:
            raise IoError(f"cannot write report to {path}: {e}") from e
    return text
