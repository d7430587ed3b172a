"""Arithmetic in the prime field F_q (q odd) and its standard additive character.

The character is chi(a) = exp(2*pi*i*a/q).  All transforms in the package read
character values from ``FieldCtx.root_table`` so that every term of a character
sum costs one table lookup and no transcendental evaluation.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EvenCharacteristic, NotPrime, ZeroInverse


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


@dataclass(frozen=True, eq=False)
class FieldCtx:
    """Lookup tables for F_q.

    ``inverse_table[a]`` is the multiplicative inverse of ``a`` (entry 0 is
    unused and set to 0).  ``root_table[a]`` is chi(a).  ``char_matrix[m, x]``
    is chi(m*x), the kernel of the one-dimensional transform.
    """

    q: int
    inverse_table: np.ndarray
    root_table: np.ndarray
    char_matrix: np.ndarray

    @property
    def units(self) -> range:
        return range(1, self.q)

    def __repr__(self):
        return f"FieldCtx(q={self.q})"


@lru_cache(maxsize=None)
def make_field(q: int) -> FieldCtx:
    q = int(q)
    if q == 2:
        raise EvenCharacteristic("characteristic 2 is excluded; q must be odd")
    if q < 3:
        raise NotPrime(f"q={q} is not a prime >= 3")
    if not is_prime(q):
        raise NotPrime(f"q={q} is not prime")
    inverse = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inverse[a] = pow(a, q - 2, q)
    roots = np.exp(2j * np.pi * np.arange(q) / q)
    # exact values at the points where cos/sin are rational
    roots[0] = 1.0
    idx = np.arange(q)
    kernel = roots[np.outer(idx, idx) % q]
    for arr in (inverse, roots, kernel):
        arr.setflags(write=False)
    return FieldCtx(q=q, inverse_table=inverse, root_table=roots, char_matrix=kernel)


def _check_element(ctx: FieldCtx, a: int) -> int:
    a = int(a)
    if not 0 <= a < ctx.q:
        raise ValueError(f"{a} is not a residue in [0, {ctx.q})")
    return a


def arith(ctx: FieldCtx, op: str, a: int, b: int | None = None) -> int:
    a = _check_element(ctx, a)
    q = ctx.q
    if op == "neg":
        return (-a) % q
    if op == "inv":
        if a == 0:
            raise ZeroInverse("0 has no multiplicative inverse")
        return int(ctx.inverse_table[a])
    if b is None:
        raise TypeError(f"{op!r} needs two operands")
    b = _check_element(ctx, b)
    if op == "add":
        return (a + b) % q
    if op == "mul":
        return (a * b) % q
    raise ValueError(f"unknown operation {op!r}")


def additive_character(ctx: FieldCtx, a):
    """chi(a) for an integer or integer array (reduced mod q)."""
    return ctx.root_table[np.asarray(a) % ctx.q]
