"""Averaging and maximal averaging operators over product varieties, test
functions, ratio measurements and the exact boundedness region."""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BadKind, InvalidExponent, ZeroFunction, ZeroJ
from .field import FieldCtx
from .grid import GridFunction, hat_transform, lp_norm, parse_exponent, vee_transform
from .spectral import measure_vee
from .variety import product_variety, reflected_j, units_indicator

MAXIMAL = "maximal"
# relative gain below which a candidate counts as a tie (rounding noise)
_IMPROVE = 1e-9


@dataclass(frozen=True, order=True)
class ExponentPair:
    """(1/p, 1/r) as exact rationals in [0, 1]."""

    inv_p: Fraction
    inv_r: Fraction

    def __post_init__(self):
        for name in ("inv_p", "inv_r"):
            v = Fraction(getattr(self, name))
            if not 0 <= v <= 1:
                raise InvalidExponent(f"{name}={v} lies outside [0, 1]")
            object.__setattr__(self, name, v)

    @classmethod
    def from_exponents(cls, p, r) -> "ExponentPair":
        return cls(_reciprocal(parse_exponent(p)), _reciprocal(parse_exponent(r)))

    @property
    def p(self):
        return math.inf if self.inv_p == 0 else 1 / self.inv_p

    @property
    def r(self):
        return math.inf if self.inv_r == 0 else 1 / self.inv_r

    def adjoint(self) -> "ExponentPair":
        """(1/r', 1/p'): exponents of the adjoint operator L^r' -> L^p'."""
        return ExponentPair(1 - self.inv_r, 1 - self.inv_p)

    def __str__(self):
        return f"(1/p, 1/r) = ({self.inv_p}, {self.inv_r})"


def _reciprocal(s):
    if s == math.inf:
        return Fraction(0)
    if s < 1:
        raise InvalidExponent(f"exponent must be >= 1, got {s}")
    return 1 / Fraction(s)


def average(f: GridFunction, j: int) -> GridFunction:
    """A_j f = f * dmu_j, through the spectrum of the measure."""
    if int(j) % f.q == 0:
        raise ZeroJ("j must be nonzero")
    fv = vee_transform(f)
    return hat_transform(fv.like(fv.values * measure_vee(f.ctx, f.d, j).values))


def average_direct(f: GridFunction, j: int) -> GridFunction:
    """|Pi_j|^-1 sum_{y in Pi_j} f(x - y), summed literally."""
    V = product_variety(f.ctx, f.d, j)
    out = np.zeros_like(f.values)
    axes = tuple(range(f.d))
    for y in V.points:
        out += np.roll(f.values, shift=tuple(int(c) for c in y), axis=axes)
    return f.like(out / len(V))


def maximal_average(f: GridFunction) -> GridFunction:
    """M f(x) = max_j |A_j f(x)| over all units j."""
    fv = vee_transform(f)
    out = np.zeros(f.values.shape)
    for j in f.ctx.units:
        aj = hat_transform(fv.like(fv.values * measure_vee(f.ctx, f.d, j).values))
        np.maximum(out, np.abs(aj.values), out=out)
    return f.like(out)


@dataclass(frozen=True)
class RatioMeasurement:
    q: int
    d: int
    j: int | str
    exponents: ExponentPair
    extremizer_tag: str
    ratio: float

    @property
    def mode(self) -> str:
        return "maximal" if self.j == MAXIMAL else "averaging"


def norm_ratio(output: GridFunction, f: GridFunction, pr: ExponentPair) -> float:
    denom = lp_norm(f, pr.p).value
    if denom == 0.0:
        raise ZeroFunction("input function is identically zero")
    return lp_norm(output, pr.r).value / denom


def ratio(f: GridFunction, target, pr: ExponentPair, tag: str = "custom") -> RatioMeasurement:
    """||T f||_r / ||f||_p with T = A_j, or T = M with r taken equal to p."""
    if not np.any(f.values):
        raise ZeroFunction("input function is identically zero")
    if target == MAXIMAL:
        pr = ExponentPair(pr.inv_p, pr.inv_p)
        out = maximal_average(f)
        j = MAXIMAL
    else:
        j = int(target) % f.q
        out = average(f, j)
    return RatioMeasurement(f.q, f.d, j, pr, tag, norm_ratio(out, f, pr))


# -- test functions ---------------------------------------------------------

BASE_KINDS = ("delta_zero", "variety_indicator", "union_indicator", "constant",
              "random_sign", "random_nonneg")


def parse_tag(tag: str):
    """Split ``"random_sign:3"`` into ("random_sign", 3)."""
    kind, _, arg = tag.partition(":")
    if kind not in BASE_KINDS:
        raise BadKind(f"unknown extremizer kind {kind!r}")
    if arg == "":
        if kind == "variety_indicator":
            raise BadKind("variety_indicator needs a variety, e.g. 'variety_indicator:1'")
        return kind, None
    if kind in ("delta_zero", "union_indicator", "constant"):
        raise BadKind(f"{kind} takes no argument")
    try:
        return kind, int(arg)
    except ValueError:
        raise BadKind(f"bad argument in extremizer tag {tag!r}") from None


def extremizer(ctx: FieldCtx, d: int, tag: str) -> GridFunction:
    kind, arg = parse_tag(tag)
    q = ctx.q
    if kind == "delta_zero":
        vals = np.zeros((q,) * d)
        vals[(0,) * d] = 1.0
        return GridFunction(ctx, d, vals)
    if kind == "constant":
        return GridFunction.constant(ctx, d)
    if kind == "union_indicator":
        return units_indicator(ctx, d)
    if kind == "variety_indicator":
        return product_variety(ctx, d, arg).indicator()
    rng = np.random.default_rng([arg, q, d])
    if kind == "random_sign":
        return GridFunction(ctx, d, rng.choice([-1.0, 1.0], size=(q,) * d))
    return GridFunction(ctx, d, rng.random((q,) * d))


def suite_tags(maximal: bool = False, seed: int = 0, adjoint: bool = True) -> list:
    """The fixed family of test functions used by sweeps and the norm search.

    ``dual_variety_indicator`` stands for the indicator of -Pi_j, the image of
    delta_0 under the adjoint of A_j; it is resolved once j is known.
    """
    tags = ["delta_zero"]
    if not maximal:
        tags.append("dual_variety_indicator")
    tags += ["union_indicator", "constant"]
    tags += [f"random_sign:{seed + i}" for i in range(3)]
    tags += [f"random_nonneg:{seed + i}" for i in range(2)]
    if adjoint and not maximal:
        tags.append("adjoint_delta_zero")
    return tags


def resolve_tag(ctx: FieldCtx, d: int, target, tag: str) -> str:
    if tag == "dual_variety_indicator":
        if target == MAXIMAL:
            raise BadKind("dual_variety_indicator needs a single variety")
        return f"variety_indicator:{reflected_j(ctx, d, int(target))}"
    return tag


def adjoint_delta_ratio(ctx: FieldCtx, d: int, j: int, pr: ExponentPair) -> RatioMeasurement:
    """Lower bound for ||A_j||_{p->r} from delta_0 under the adjoint.

    The adjoint of A_j on normalized L^2 is A_j' with j' = (-1)^d j, and
    ||A_j||_{p->r} = ||A_j'||_{r'->p'}.
    """
    jr = reflected_j(ctx, d, j)
    m = ratio(extremizer(ctx, d, "delta_zero"), jr, pr.adjoint())
    return RatioMeasurement(ctx.q, d, int(j) % ctx.q, pr, "adjoint_delta_zero", m.ratio)


def measure_tag(ctx: FieldCtx, d: int, target, pr: ExponentPair, tag: str) -> RatioMeasurement:
    if tag == "adjoint_delta_zero":
        if target == MAXIMAL:
            raise BadKind("adjoint_delta_zero applies to single-variety averaging only")
        return adjoint_delta_ratio(ctx, d, target, pr)
    return ratio(extremizer(ctx, d, resolve_tag(ctx, d, target, tag)), target, pr, tag)


def opnorm_lower_bound(ctx: FieldCtx, d: int, target, pr: ExponentPair,
                       budget: int = 0, seed: int = 0):
    """Best ratio over the test-function suite, refined by coordinate ascent.

    Ascent works on nonnegative functions starting from |best suite function|.
    Coordinates are visited cyclically in index order; each step raises one
    coordinate by the current step size and keeps the change only if the ratio
    strictly improves.  The step starts at max f and halves after every full
    pass without an improvement.  The trial sequence is deterministic, so the
    result is nondecreasing in ``budget``.  Returns ``(best_ratio, best_tag)``.
    """
    best_ratio, best_tag = -1.0, None
    for tag in suite_tags(target == MAXIMAL, seed, adjoint=False):
        r = measure_tag(ctx, d, target, pr, tag).ratio
        if r > best_ratio * (1 + _IMPROVE):
            best_ratio, best_tag = r, tag
    if budget <= 0:
        return best_ratio, best_tag

    f = np.abs(extremizer(ctx, d, resolve_tag(ctx, d, target, best_tag)).values).reshape(-1).copy()
    step = float(f.max())
    improved = pass_improved = False
    proto = GridFunction.zeros(ctx, d)
    for t in range(budget):
        i = t % f.size
        trial = f.copy()
        trial[i] += step
        r = ratio(proto.like(trial), target, pr).ratio
        if r > best_ratio * (1 + _IMPROVE):
            f, best_ratio = trial, r
            improved = pass_improved = True
        if i == f.size - 1:
            if not pass_improved:
                step /= 2
            pass_improved = False
    return best_ratio, (best_tag + "+ascent") if improved else best_tag


# -- exponent geometry ------------------------------------------------------

def region_membership(d: int, pr: ExponentPair) -> bool:
    """Whether (1/p, 1/r) lies in the hull of (0,0), (0,1), (1,1), (d/(d+1), 1/(d+1))."""
    x, y = pr.inv_p, pr.inv_r
    return y >= d * x - d + 1 and y >= x / d and y <= 1 and x >= 0


def region_vertices(d: int) -> tuple:
    return ((Fraction(0), Fraction(0)), (Fraction(0), Fraction(1)),
            (Fraction(1), Fraction(1)), (Fraction(d, d + 1), Fraction(1, d + 1)))


def predicted_exponents(d: int, pr: ExponentPair):
    """log_q growth of the delta_0 ratio: (single variety, maximal operator)."""
    return d * pr.inv_p - pr.inv_r - d + 1, d * pr.inv_p - d + 1


def maximal_bounded(d: int, pr: ExponentPair) -> bool:
    """p >= d/(d-1), i.e. 1/p <= (d-1)/d."""
    return pr.inv_p <= Fraction(d - 1, d)


def predicted_growth(d: int, pr: ExponentPair, tag: str, maximal: bool):
    """Predicted log_q slope of a test function's ratio, or None if not known."""
    if maximal:
        return predicted_exponents(d, pr)[1] if tag == "delta_zero" else None
    if tag == "delta_zero":
        return predicted_exponents(d, pr)[0]
    if tag == "adjoint_delta_zero":
        return predicted_exponents(d, pr.adjoint())[0]
    return None
