"""Product j-varieties, their normalized surface measures, and the frequency
classes N_k = {m : m has exactly k zero coordinates}."""
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import BadK, EmptyVariety, ZeroJ
from .field import FieldCtx, make_field
from .grid import GridFunction, check_grid_size


@dataclass(frozen=True, eq=False)
class VarietySupport:
    ctx: FieldCtx
    d: int
    points: np.ndarray  # (n, d), lexicographically sorted
    label: str

    def __len__(self):
        return len(self.points)

    def indicator(self) -> GridFunction:
        return GridFunction.indicator(self.ctx, self.d, self.points)

    def point_set(self) -> set:
        return {tuple(int(c) for c in p) for p in self.points}


@dataclass(frozen=True, eq=False)
class Measure:
    """Surface measure stored as a density: q^d/|V| on V, zero elsewhere, so
    that ``convolve(f, measure.density)`` is the average of f over x - V."""

    density: GridFunction
    support: VarietySupport


def _sorted_rows(points: np.ndarray) -> np.ndarray:
    order = np.lexsort(points.T[::-1])
    return points[order]


@lru_cache(maxsize=256)
def _product_points(q: int, d: int, j: int) -> np.ndarray:
    ctx = make_field(q)
    check_grid_size(q, d)
    if d == 1:
        pts = np.array([[j]], dtype=np.int64)
    else:
        head = np.indices((q - 1,) * (d - 1)).reshape(d - 1, -1).T + 1
        prod = np.ones(len(head), dtype=np.int64)
        for col in head.T:
            prod = prod * col % q
        last = j * ctx.inverse_table[prod] % q
        pts = np.column_stack([head, last]).astype(np.int64)
    pts = _sorted_rows(pts)
    pts.setflags(write=False)
    return pts


def product_variety(ctx: FieldCtx, d: int, j: int) -> VarietySupport:
    """Pi_j = {x in F_q^d : x_1 * ... * x_d = j}, for j a unit."""
    j = int(j) % ctx.q
    if j == 0:
        raise ZeroJ("Pi_0 is not a product j-variety; j must be nonzero")
    return VarietySupport(ctx, d, _product_points(ctx.q, d, j), f"Pi_{j}")


def surface_measure(V: VarietySupport) -> Measure:
    n = len(V)
    if n == 0:
        raise EmptyVariety(f"variety {V.label} has no points")
    q, d = V.ctx.q, V.d
    vals = np.zeros((q,) * d, dtype=np.complex128)
    vals[tuple(V.points.T)] = q ** d / n
    return Measure(GridFunction(V.ctx, d, vals), V)


@lru_cache(maxsize=256)
def _cached_measure(q: int, d: int, j: int) -> Measure:
    return surface_measure(product_variety(make_field(q), d, j))


def product_measure(ctx: FieldCtx, d: int, j: int) -> Measure:
    j = int(j) % ctx.q
    if j == 0:
        raise ZeroJ("Pi_0 is not a product j-variety; j must be nonzero")
    return _cached_measure(ctx.q, d, j)


def reflected_j(ctx: FieldCtx, d: int, j: int) -> int:
    """The j' with -Pi_j = Pi_j', namely (-1)^d j."""
    return (-j if d % 2 else j) % ctx.q


def reflect_variety(V: VarietySupport) -> VarietySupport:
    pts = _sorted_rows((-V.points) % V.ctx.q)
    return VarietySupport(V.ctx, V.d, pts, f"-{V.label}")


def zero_count(m) -> int:
    return sum(1 for c in m if int(c) == 0)


@lru_cache(maxsize=64)
def _zero_count_grid(q: int, d: int) -> np.ndarray:
    check_grid_size(q, d)
    counts = np.zeros((q,) * d, dtype=np.int64)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = q
        counts = counts + (np.arange(q) == 0).reshape(shape)
    counts.setflags(write=False)
    return counts


def zero_count_grid(ctx: FieldCtx, d: int) -> np.ndarray:
    """Array of shape (q,)*d holding the number of zero coordinates of each m."""
    return _zero_count_grid(ctx.q, d)


def zero_pattern_indicator(ctx: FieldCtx, d: int, k: int) -> GridFunction:
    """Frequency-side indicator of N_k."""
    if not 0 <= k <= d:
        raise BadK(f"k must lie in [0, {d}], got {k}")
    return GridFunction(ctx, d, (zero_count_grid(ctx, d) == k).astype(np.complex128))


def expected_nk_size(q: int, d: int, k: int) -> int:
    return comb(d, k) * (q - 1) ** (d - k)


def units_indicator(ctx: FieldCtx, d: int) -> GridFunction:
    """Indicator of (F_q^*)^d, the union of all Pi_j."""
    return zero_pattern_indicator(ctx, d, 0)
