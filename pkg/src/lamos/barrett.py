"""Functional Barrett modular multiplication on limb integers.

This is the architecture-independent golden model the datapath simulator is
checked against::

    C = A * B
    u = floor(C / 2^(n-1)) * M'        with M' = floor(2^(2n) / M)
    E = floor(u / 2^(n+1))             quotient estimate, q - 2 <= E <= q
    P = E * M
    T = C - P                          0 <= T < 3M
    R = T, T - M or T - 2M
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from . import bigint as bi
from .bigint import BigUint
from .errors import ContractViolation, InvalidModulusError, InvalidParameterError, OutOfRangeError

IntLike = Union[BigUint, int]

MAX_REFINE_STEPS = 2


def as_biguint(x: IntLike, width: int = bi.DEFAULT_LIMB_BITS) -> BigUint:
    if isinstance(x, BigUint):
        if x.width != width:
            raise InvalidParameterError(f"expected limb width {width}, got {x.width}")
        return x
    return bi.decompose(int(x), width)


@dataclass(frozen=True)
class BarrettContext:
    """Modulus with its precomputed reciprocal. Build with :func:`precompute_context`."""

    n: int
    modulus: BigUint
    m_prime: BigUint

    @property
    def width(self) -> int:
        return self.modulus.width


@dataclass(frozen=True)
class ModMulTrace:
    c: BigUint
    u: BigUint
    e: BigUint
    p: BigUint
    t: BigUint
    refine_count: int
    r: BigUint

    def as_dict(self) -> dict[str, str | int]:
        return {
            "C": self.c.to_hex(),
            "u": self.u.to_hex(),
            "E": self.e.to_hex(),
            "P": self.p.to_hex(),
            "T": self.t.to_hex(),
            "refine_count": self.refine_count,
            "R": self.r.to_hex(),
        }


def precompute_context(modulus: IntLike, n: int, width: int = bi.DEFAULT_LIMB_BITS) -> BarrettContext:
    """Offline step: M' = floor(2^(2n) / M) for a normalized n-bit modulus."""
    if n < 2:
        raise InvalidParameterError(f"bit width n must be >= 2, got {n}")
    m = as_biguint(modulus, width)
    if m.bit_length() != n:
        # top bit must be set: 2^(n-1) <= M < 2^n
        raise InvalidModulusError(
            f"modulus must have top bit set: expected bit length {n}, got {m.bit_length()}"
        )
    numerator = bi.shl(bi.decompose(1, width), 2 * n)
    m_prime, _ = bi.div_floor(numerator, m)
    return BarrettContext(n=n, modulus=m, m_prime=m_prime)


def estimate_quotient_parts(ctx: BarrettContext, c: BigUint) -> tuple[BigUint, BigUint]:
    """(u, E) for product C."""
    top = bi.shr(c, ctx.n - 1)
    u = bi.mul_schoolbook(top, ctx.m_prime)
    return u, bi.shr(u, ctx.n + 1)


def estimate_quotient(ctx: BarrettContext, c: IntLike) -> BigUint:
    return estimate_quotient_parts(ctx, as_biguint(c, ctx.width))[1]


def refine(t: IntLike, modulus: IntLike, width: Optional[int] = None) -> tuple[BigUint, int]:
    """Bring T < 3M into [0, M) with at most two subtractions of M.

    The limb width follows ``width``, else the BigUint argument, else the default.
    """
    if width is None:
        width = next((x.width for x in (modulus, t) if isinstance(x, BigUint)), bi.DEFAULT_LIMB_BITS)
    m = as_biguint(modulus, width)
    t0 = as_biguint(t, width)
    r = t0
    count = 0
    while bi.cmp(r, m) >= 0:
        if count == MAX_REFINE_STEPS:
            raise ContractViolation(
                f"T=0x{t0.to_hex()} >= 3M for M=0x{m.to_hex()}; quotient estimate is wrong"
            )
        r = bi.sub(r, m)
        count += 1
    return r, count


def barrett_modmul(ctx: BarrettContext, a: IntLike, b: IntLike) -> ModMulTrace:
    """A·B mod M with every intermediate recorded."""
    a = as_biguint(a, ctx.width)
    b = as_biguint(b, ctx.width)
    if bi.cmp(a, ctx.modulus) >= 0 or bi.cmp(b, ctx.modulus) >= 0:
        raise OutOfRangeError("operands must satisfy A, B < M")
    c = bi.mul_schoolbook(a, b)
    u, e = estimate_quotient_parts(ctx, c)
    p = bi.mul_schoolbook(e, ctx.modulus)
    t = bi.sub(c, p)
    r, count = refine(t, ctx.modulus)
    return ModMulTrace(c=c, u=u, e=e, p=p, t=t, refine_count=count, r=r)
