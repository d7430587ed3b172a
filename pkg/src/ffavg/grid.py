"""Dense complex functions on F_q^d.

Values are held in an array of shape ``(q,) * d``; its C-order flattening is the
lexicographic index ``sum_i x_i * q**(d-1-i)``.  Two Fourier transforms are
provided, matching the conventions used for measures on F_q^d:

* ``vee_transform``: f^v(m) = q^-d * sum_x f(x) chi(m.x)   (space -> frequency)
* ``hat_transform``: F^(x) = sum_m F(m) chi(-m.x)          (frequency -> space)

They are mutually inverse, and with the normalized convolution
(f*g)(x) = q^-d sum_y f(x-y) g(y) one has (f*g)^v = f^v g^v.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import GridTooLarge, InvalidExponent, ShapeMismatch
from .field import FieldCtx

MAX_GRID_POINTS = 2 ** 21


def parse_exponent(s) -> Fraction | float:
    """Exponent as an exact Fraction, or ``math.inf``.

    Accepts ints, Fractions, floats with an exact short decimal form and
    strings such as ``"3/2"``, ``"inf"``.
    """
    if isinstance(s, str):
        t = s.strip().lower()
        if t in ("inf", "infinity", "oo"):
            return math.inf
        return Fraction(t)
    if isinstance(s, float):
        if math.isinf(s):
            return math.inf
        return Fraction(s).limit_denominator(10 ** 9)
    return Fraction(s)


@dataclass(frozen=True, eq=False)
class GridFunction:
    ctx: FieldCtx
    d: int
    values: np.ndarray

    def __post_init__(self):
        q, d = self.ctx.q, self.d
        if d < 1:
            raise ShapeMismatch(f"dimension must be >= 1, got {d}")
        check_grid_size(q, d)
        vals = np.array(self.values, dtype=np.complex128)
        if vals.size != q ** d:
            raise ShapeMismatch(f"expected {q ** d} values, got {vals.size}")
        vals = vals.reshape((q,) * d)
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def q(self) -> int:
        return self.ctx.q

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    @property
    def size(self) -> int:
        return self.q ** self.d

    def __getitem__(self, point):
        return self.values[tuple(int(c) % self.q for c in point)]

    def __repr__(self):
        return f"GridFunction(q={self.q}, d={self.d})"

    def like(self, values) -> "GridFunction":
        return GridFunction(self.ctx, self.d, values)

    @classmethod
    def zeros(cls, ctx: FieldCtx, d: int) -> "GridFunction":
        return cls(ctx, d, np.zeros((ctx.q,) * d, dtype=np.complex128))

    @classmethod
    def constant(cls, ctx: FieldCtx, d: int, c: complex = 1.0) -> "GridFunction":
        return cls(ctx, d, np.full((ctx.q,) * d, c, dtype=np.complex128))

    @classmethod
    def indicator(cls, ctx: FieldCtx, d: int, points) -> "GridFunction":
        vals = np.zeros((ctx.q,) * d, dtype=np.complex128)
        pts = np.asarray(points, dtype=np.int64).reshape(-1, d) % ctx.q
        vals[tuple(pts.T)] = 1.0
        return cls(ctx, d, vals)


def check_grid_size(q: int, d: int) -> None:
    if q ** d > MAX_GRID_POINTS:
        raise GridTooLarge(f"q^d = {q}^{d} = {q ** d} exceeds the cap {MAX_GRID_POINTS}")


def point_to_index(point, q: int) -> int:
    idx = 0
    for c in point:
        idx = idx * q + int(c) % q
    return idx


def index_to_point(index: int, q: int, d: int) -> tuple:
    coords = []
    for _ in range(d):
        index, c = divmod(index, q)
        coords.append(c)
    return tuple(reversed(coords))


def all_points(q: int, d: int) -> np.ndarray:
    """Every point of F_q^d as rows, in lexicographic index order."""
    return np.indices((q,) * d).reshape(d, -1).T


@dataclass(frozen=True)
class NormValue:
    value: float
    exponent: Fraction | float
    side: str  # "space" (normalized) or "frequency" (counting)

    def __float__(self):
        return self.value


def _check_exponent(s):
    s = parse_exponent(s)
    if s < 1:
        raise InvalidExponent(f"norm exponent must be >= 1, got {s}")
    return s


def _power_mean(mags: np.ndarray, s, weight: float) -> float:
    """(weight * sum mags^s)^(1/s), scaled by the max to avoid underflow."""
    top = float(mags.max()) if mags.size else 0.0
    if top == 0.0:
        return 0.0
    if math.isinf(s):
        return top
    e = float(s)
    return top * float(weight * np.sum((mags / top) ** e)) ** (1.0 / e)


def lp_norm(f: GridFunction, s) -> NormValue:
    """(q^-d sum_x |f(x)|^s)^(1/s); the maximum of |f| when s is infinite."""
    s = _check_exponent(s)
    return NormValue(_power_mean(np.abs(f.flat), s, 1.0 / f.size), s, "space")


def counting_norm(F: GridFunction, s) -> NormValue:
    """(sum_m |F(m)|^s)^(1/s) without normalization."""
    s = _check_exponent(s)
    return NormValue(_power_mean(np.abs(F.flat), s, 1.0), s, "frequency")


def _apply_axiswise(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = arr
    for axis in range(arr.ndim):
        out = np.moveaxis(np.tensordot(kernel, out, axes=([1], [axis])), 0, axis)
    return out


def vee_transform(f: GridFunction) -> GridFunction:
    out = _apply_axiswise(f.values, f.ctx.char_matrix) / f.size
    return f.like(out)


def hat_transform(F: GridFunction) -> GridFunction:
    out = _apply_axiswise(F.values, F.ctx.char_matrix.conj())
    return F.like(out)


def _same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.ctx.q != g.ctx.q or f.d != g.d:
        raise ShapeMismatch(f"grids differ: (q={f.q}, d={f.d}) vs (q={g.q}, d={g.d})")


def convolve(f: GridFunction, g: GridFunction, method: str = "fourier") -> GridFunction:
    """Normalized convolution q^-d sum_y f(x-y) g(y).

    ``method="direct"`` evaluates the sum literally in O(q^(2d)) and serves as
    an oracle for the default Fourier path.
    """
    _same_grid(f, g)
    if method == "fourier":
        return hat_transform(f.like(vee_transform(f).values * vee_transform(g).values))
    if method == "direct":
        return f.like(convolve_direct(f.values, g.values))
    raise ValueError(f"unknown convolution method {method!r}")


def convolve_direct(fv: np.ndarray, gv: np.ndarray) -> np.ndarray:
    d = fv.ndim
    out = np.zeros_like(fv, dtype=np.complex128)
    axes = tuple(range(d))
    for y in zip(*np.nonzero(gv)):
        out += gv[y] * np.roll(fv, shift=y, axis=axes)
    return out / fv.size


def translate(f: GridFunction, a) -> GridFunction:
    """x -> f(x - a)."""
    shift = tuple(int(c) % f.q for c in a)
    return f.like(np.roll(f.values, shift=shift, axis=tuple(range(f.d))))


def reflect(f: GridFunction) -> GridFunction:
    """x -> f(-x)."""
    idx = (-np.arange(f.q)) % f.q
    return f.like(f.values[np.ix_(*([idx] * f.d))])
