"""Fourier analysis of the surface measure on Pi_j.

For m with at least one zero coordinate the transform of the measure is known
exactly: (dmu_j)^v(m) = (-1)^(d-l) (q-1)^-(d-l), l the number of zero
coordinates of m.  On the all-nonzero class N_0 it is a normalized
hyper-Kloosterman sum, bounded here by the explicit Deligne constant
d * q^((d-1)/2) / (q-1)^(d-1).

Splitting the spectrum along N_0, N_1, ..., N_d gives

    dmu_j = Omega_j + sum_{k>=1} (-1)^(d-k) (q-1)^(k-d) hat(1_{N_k}),

with Omega_j = hat(1_{N_0}) * dmu_j.  ``decompose`` builds Omega_j by
truncating the spectrum and measures how exactly the identity holds.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import BadK, BoundViolation, BoundViolationError, ZeroJ
from .field import FieldCtx, make_field
from .grid import (GridFunction, convolve, hat_transform, lp_norm, parse_exponent,
                   reflect, vee_transform)
from .variety import product_measure, zero_count_grid, zero_pattern_indicator

TOL_ABS = 1e-6
TOL_REL = 1e-6


@lru_cache(maxsize=512)
def _measure_vee(q: int, d: int, j: int) -> GridFunction:
    return vee_transform(product_measure(make_field(q), d, j).density)


def measure_vee(ctx: FieldCtx, d: int, j: int) -> GridFunction:
    """(dmu_j)^v on every frequency m."""
    j = int(j) % ctx.q
    if j == 0:
        raise ZeroJ("j must be nonzero")
    return _measure_vee(ctx.q, d, j)


def closed_form_values(ctx: FieldCtx, d: int) -> np.ndarray:
    """(-1)^(d-l)(q-1)^-(d-l) where l >= 1, NaN on N_0."""
    ell = zero_count_grid(ctx, d)
    e = d - ell
    vals = np.where(e % 2 == 0, 1.0, -1.0) * float(ctx.q - 1) ** (-e.astype(float))
    return np.where(ell >= 1, vals, np.nan)


def decay_bound(q: int, d: int) -> float:
    return d * q ** ((d - 1) / 2) / (q - 1) ** (d - 1)


def kloosterman_oracle(ctx: FieldCtx, d: int, j: int, m) -> complex:
    """|Pi_j|^-1 sum_{y in Pi_j} chi(m.y), summed point by point.

    Deliberately avoids the grid transforms; used to cross-check them.
    """
    from .variety import product_variety

    pts = product_variety(ctx, d, j).points
    phases = (pts @ np.asarray(m, dtype=np.int64)) % ctx.q
    return complex(np.exp(2j * np.pi * phases / ctx.q).sum() / len(pts))


@dataclass(frozen=True, eq=False)
class SpectralTable:
    q: int
    d: int
    j: int
    vee_values: GridFunction
    closed_form_residual: float
    decay_max: float


def spectral_table(ctx: FieldCtx, d: int, j: int) -> SpectralTable:
    vee = measure_vee(ctx, d, j)
    ell = zero_count_grid(ctx, d)
    exact = closed_form_values(ctx, d)
    on_formula = ell >= 1
    residual = float(np.max(np.abs(vee.values[on_formula] - exact[on_formula])))
    kloost = np.abs(vee.values[ell == 0])
    decay = float(kloost.max()) if kloost.size else 0.0
    return SpectralTable(ctx.q, d, int(j) % ctx.q, vee, residual, decay)


def decay_certificate(table: SpectralTable, tol: float = TOL_ABS):
    """Return (decay_max, decay_max * q^((d-1)/2)).

    Raises BoundViolationError if decay_max exceeds the Deligne-type bound.
    """
    q, d = table.q, table.d
    bound = decay_bound(q, d)
    if table.decay_max > bound * (1 + TOL_REL) + tol:
        raise BoundViolationError(
            BoundViolation("decay", q, d, table.j, table.decay_max, bound))
    return table.decay_max, table.decay_max * q ** ((d - 1) / 2)


def tail_coefficient(q: int, d: int, k: int) -> Fraction:
    """(-1)^(d-k) (q-1)^(k-d)."""
    return Fraction((-1) ** (d - k), (q - 1) ** (d - k))


@dataclass(frozen=True, eq=False)
class Decomposition:
    q: int
    d: int
    j: int
    omega: GridFunction
    tail_coefficients: tuple
    residual: float


def decompose(ctx: FieldCtx, d: int, j: int) -> Decomposition:
    vee = measure_vee(ctx, d, j)
    density = product_measure(ctx, d, j).density
    n0 = zero_pattern_indicator(ctx, d, 0).values.real
    omega = hat_transform(vee.like(vee.values * n0))
    coeffs = tuple(tail_coefficient(ctx.q, d, k) for k in range(1, d + 1))
    rebuilt = omega.values.copy()
    for k, c in enumerate(coeffs, start=1):
        rebuilt += float(c) * nk_hat(ctx, d, k).values
    residual = float(np.max(np.abs(density.values - rebuilt)))
    return Decomposition(ctx.q, d, int(j) % ctx.q, omega, coeffs, residual)


def omega_by_convolution(ctx: FieldCtx, d: int, j: int) -> GridFunction:
    """Omega_j = hat(1_{N_0}) * dmu_j evaluated on the space side (oracle path)."""
    density = product_measure(ctx, d, j).density
    return convolve(nk_hat(ctx, d, 0), density, method="direct")


def omega_sup_bound(q: int, d: int) -> float:
    return 2.0 ** d * (q - 1)


def omega_sup(dec: Decomposition) -> float:
    """max_x |Omega_j(x)|, checked against 2^d (q-1)."""
    value = float(np.max(np.abs(dec.omega.values)))
    bound = omega_sup_bound(dec.q, dec.d)
    if value > bound * (1 + TOL_REL):
        raise BoundViolationError(BoundViolation("omega_sup", dec.q, dec.d, dec.j, value, bound))
    return value


@lru_cache(maxsize=128)
def _nk_hat(q: int, d: int, k: int) -> GridFunction:
    return hat_transform(zero_pattern_indicator(make_field(q), d, k))


def nk_hat(ctx: FieldCtx, d: int, k: int) -> GridFunction:
    if not 0 <= k <= d:
        raise BadK(f"k must lie in [0, {d}], got {k}")
    return _nk_hat(ctx.q, d, k)


def nk_hat_bound(q: int, d: int, k: int) -> float:
    return 2.0 * q ** (d - k)


def nk_hat_norm(ctx: FieldCtx, d: int, k: int, s) -> float:
    """L^s norm of hat(1_{N_k}); at s = (d+1)/2 and k >= 1 it must stay below 2 q^(d-k)."""
    s = parse_exponent(s)
    value = lp_norm(nk_hat(ctx, d, k), s).value
    if k >= 1 and s == Fraction(d + 1, 2):
        bound = nk_hat_bound(ctx.q, d, k)
        if value > bound * (1 + TOL_REL):
            raise BoundViolationError(BoundViolation(f"nk_hat_norm[k={k}]", ctx.q, d, None, value, bound))
    return value


def multiplier_norm(dec: Decomposition) -> float:
    """Exact L^2 operator norm of f -> f * Omega_j: max over N_0 of |(dmu_j)^v|."""
    vee = measure_vee(make_field(dec.q), dec.d, dec.j)
    ell = zero_count_grid(make_field(dec.q), dec.d)
    vals = np.abs(vee.values[ell == 0])
    return float(vals.max()) if vals.size else 0.0


def power_iteration_norm(dec: Decomposition, iterations: int = 3000, seed: int = 0,
                         rtol: float = 1e-12) -> float:
    """Estimate the L^2 -> L^2 norm of f -> f * Omega_j by power iteration on T*T.

    Works on the space side only: T f = f * Omega_j and T* g = g * conj(Omega_j(-x)).
    """
    omega = dec.omega
    adj = reflect(omega.like(omega.values.conj()))
    rng = np.random.default_rng(seed)
    shape = omega.values.shape
    f = omega.like(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    estimate = 0.0
    for _ in range(iterations):
        nf = lp_norm(f, 2).value
        if nf == 0.0:
            return 0.0
        f = f.like(f.values / nf)
        g = convolve(convolve(f, omega), adj)
        new = math.sqrt(max(lp_norm(g, 2).value, 0.0))
        if abs(new - estimate) <= rtol * new:
            return new
        estimate = new
        f = g
    return estimate


def omega_l2_bound(q: int, d: int) -> float:
    return decay_bound(q, d)
