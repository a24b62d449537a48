"""Arbitrary-precision unsigned integers as little-endian limb vectors.

Everything above the single-limb product is done here on limbs, so the
simulated datapath can be checked against code it shares nothing with.
Host ``int`` only appears at the boundaries (``decompose`` / ``recompose``
and hex parsing).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import zip_longest
from operator import mul
from typing import Iterable, Sequence

from .errors import InvalidParameterError, UnderflowError

DEFAULT_LIMB_BITS = 8


def _trim(limbs: list[int]) -> tuple[int, ...]:
    end = len(limbs)
    while end and limbs[end - 1] == 0:
        end -= 1
    return tuple(limbs[:end])


_new = object.__new__


@dataclass(frozen=True, slots=True)
class BigUint:
    """Nonnegative integer stored as canonical little-endian limbs.

    Zero is the empty limb tuple. Two values with the same width compare
    equal iff their limb tuples are equal.
    """

    limbs: tuple[int, ...] = ()
    width: int = DEFAULT_LIMB_BITS

    def __post_init__(self) -> None:
        if self.width < 1:
            raise InvalidParameterError(f"limb width must be >= 1, got {self.width}")
        limbs = tuple(self.limbs)
        base = 1 << self.width
        for limb in limbs:
            if not 0 <= limb < base:
                raise InvalidParameterError(f"limb {limb} outside [0, 2^{self.width})")
        if limbs and limbs[-1] == 0:
            raise InvalidParameterError("limbs are not canonical (trailing zero limb)")
        object.__setattr__(self, "limbs", limbs)

    @classmethod
    def _raw(cls, limbs: tuple[int, ...], width: int) -> BigUint:
        # Internal results are canonical by construction; skip validation.
        obj = _new(cls)
        _set_limbs(obj, limbs)
        _set_width(obj, width)
        return obj

    @classmethod
    def from_int(cls, x: int, width: int = DEFAULT_LIMB_BITS) -> BigUint:
        return decompose(x, width)

    @classmethod
    def from_limbs(cls, limbs: Iterable[int], width: int = DEFAULT_LIMB_BITS) -> BigUint:
        """Build from a possibly zero-padded limb sequence."""
        return cls(_trim(list(limbs)), width)

    @classmethod
    def from_hex(cls, text: str, width: int = DEFAULT_LIMB_BITS) -> BigUint:
        text = text.strip().lower()
        if text.startswith("0x"):
            text = text[2:]
        if not text:
            raise InvalidParameterError("empty hex string")
        try:
            value = int(text, 16)
        except ValueError:
            raise InvalidParameterError(f"not a hex string: {text!r}") from None
        return decompose(value, width)

    def to_hex(self) -> str:
        """Lowercase hex, no prefix, most-significant digit first ("0" for zero)."""
        if not self.limbs:
            return "0"
        digits = []
        acc = 0
        nbits = 0
        for limb in self.limbs:
            acc |= limb << nbits
            nbits += self.width
            while nbits >= 4:
                digits.append("0123456789abcdef"[acc & 0xF])
                acc >>= 4
                nbits -= 4
        if nbits:
            digits.append("0123456789abcdef"[acc])
        text = "".join(reversed(digits)).lstrip("0")
        return text or "0"

    def __int__(self) -> int:
        return recompose(self)

    def __index__(self) -> int:
        return recompose(self)

    def __bool__(self) -> bool:
        return bool(self.limbs)

    def __len__(self) -> int:
        return len(self.limbs)

    def __lt__(self, other: BigUint) -> bool:
        return cmp(self, other) < 0

    def __le__(self, other: BigUint) -> bool:
        return cmp(self, other) <= 0

    def __gt__(self, other: BigUint) -> bool:
        return cmp(self, other) > 0

    def __ge__(self, other: BigUint) -> bool:
        return cmp(self, other) >= 0

    def __repr__(self) -> str:
        return f"BigUint(0x{self.to_hex()}, width={self.width})"

    def bit_length(self) -> int:
        if not self.limbs:
            return 0
        return self.width * (len(self.limbs) - 1) + self.limbs[-1].bit_length()

    def padded(self, count: int) -> tuple[int, ...]:
        """Limbs zero-extended to exactly ``count`` entries."""
        if count < len(self.limbs):
            raise InvalidParameterError(f"value needs {len(self.limbs)} limbs, cannot pad to {count}")
        return self.limbs + (0,) * (count - len(self.limbs))


_set_limbs = BigUint.limbs.__set__
_set_width = BigUint.width.__set__
_raw = BigUint._raw


def decompose(x: int, w: int = DEFAULT_LIMB_BITS) -> BigUint:
    """Split ``x`` into base-2^w digits, least significant first."""
    if w < 1:
        raise InvalidParameterError(f"limb width must be >= 1, got {w}")
    if x < 0:
        raise InvalidParameterError("BigUint cannot hold a negative value")
    mask = (1 << w) - 1
    limbs = []
    while x:
        limbs.append(x & mask)
        x >>= w
    return _raw(tuple(limbs), w)


def recompose(a: BigUint) -> int:
    value = 0
    for limb in reversed(a.limbs):
        value = (value << a.width) | limb
    return value


def _same_width(a: BigUint, b: BigUint) -> int:
    if a.width != b.width:
        raise InvalidParameterError(f"limb width mismatch: {a.width} vs {b.width}")
    return a.width


def cmp(a: BigUint, b: BigUint) -> int:
    """-1, 0 or 1 as a <, ==, > b."""
    _same_width(a, b)
    x, y = a.limbs, b.limbs
    if len(x) != len(y):
        return -1 if len(x) < len(y) else 1
    for i in range(len(x) - 1, -1, -1):
        if x[i] != y[i]:
            return -1 if x[i] < y[i] else 1
    return 0


def add(a: BigUint, b: BigUint) -> BigUint:
    w = _same_width(a, b)
    mask = (1 << w) - 1
    out = []
    carry = 0
    for x, y in zip_longest(a.limbs, b.limbs, fillvalue=0):
        s = x + y + carry
        out.append(s & mask)
        carry = s >> w
    if carry:
        out.append(carry)
    return _raw(tuple(out), w)


def sub(a: BigUint, b: BigUint) -> BigUint:
    """a - b; raises UnderflowError when a < b."""
    w = _same_width(a, b)
    x, y = a.limbs, b.limbs
    if len(y) > len(x):
        raise UnderflowError("subtrahend exceeds minuend")
    mask = (1 << w) - 1
    out = []
    borrow = 0
    for i, yi in enumerate(y):
        d = x[i] - yi - borrow
        out.append(d & mask)
        borrow = d < 0
    for xi in x[len(y):]:
        d = xi - borrow
        out.append(d & mask)
        borrow = d < 0
    if borrow:
        raise UnderflowError("subtrahend exceeds minuend")
    while out and not out[-1]:
        out.pop()
    return _raw(tuple(out), w)


def shr(a: BigUint, k: int) -> BigUint:
    """floor(a / 2^k)."""
    if k < 0:
        raise InvalidParameterError("shift count must be nonnegative")
    w = a.width
    whole, part = divmod(k, w)
    limbs = a.limbs[whole:]
    if not part or not limbs:
        return _raw(limbs, w)
    mask = (1 << w) - 1
    up = w - part
    out = [((lo >> part) | (hi << up)) & mask for lo, hi in zip(limbs, limbs[1:] + (0,))]
    if not out[-1]:
        out.pop()
    return _raw(tuple(out), w)


def shl(a: BigUint, k: int) -> BigUint:
    """a * 2^k."""
    if k < 0:
        raise InvalidParameterError("shift count must be nonnegative")
    w = a.width
    if not a.limbs:
        return a
    whole, part = divmod(k, w)
    if not part:
        return _raw((0,) * whole + a.limbs, w)
    mask = (1 << w) - 1
    out = [0] * whole
    carry = 0
    for limb in a.limbs:
        out.append(((limb << part) | carry) & mask)
        carry = limb >> (w - part)
    out.append(carry)
    return _raw(_trim(out), w)


def low_bits(a: BigUint, k: int) -> BigUint:
    """a mod 2^k."""
    w = a.width
    whole, part = divmod(k, w)
    limbs = list(a.limbs[:whole])
    if part and len(a.limbs) > whole:
        limbs.append(a.limbs[whole] & ((1 << part) - 1))
    return _raw(_trim(limbs), w)


def propagate_columns(columns: Sequence[int], w: int) -> BigUint:
    """Normalize position sums Σ columns[c]·2^(w·c) into canonical limbs."""
    return _raw(_trim(_propagate(columns, w)), w)


def _propagate(columns: Sequence[int], w: int) -> list[int]:
    mask = (1 << w) - 1
    out = []
    carry = 0
    for col in columns:
        s = col + carry
        out.append(s & mask)
        carry = s >> w
    while carry:
        out.append(carry & mask)
        carry >>= w
    return out


# Multiplication and division run on packed digits of roughly machine-word
# width; a digit is `group` consecutive limbs. This is the same schoolbook /
# Algorithm D arithmetic, just in a larger radix.
_WORD_BITS = 64


def _group(w: int) -> int:
    return max(1, _WORD_BITS // w)


def _pack(limbs: Sequence[int], w: int, group: int) -> list[int]:
    if group == 1:
        return list(limbs)
    digits = []
    for i in range(0, len(limbs), group):
        d = 0
        for limb in reversed(limbs[i : i + group]):
            d = (d << w) | limb
        digits.append(d)
    return digits


def _unpack(digits: Sequence[int], w: int, group: int) -> tuple[int, ...]:
    if group == 1:
        return _trim(list(digits))
    mask = (1 << w) - 1
    limbs = []
    last = len(digits) - 1
    while last >= 0 and not digits[last]:
        last -= 1
    for i in range(last):
        d = digits[i]
        for _ in range(group):
            limbs.append(d & mask)
            d >>= w
    if last >= 0:
        d = digits[last]
        while d:
            limbs.append(d & mask)
            d >>= w
    return tuple(limbs)


def _mul_digits(x: Sequence[int], y: Sequence[int]) -> list[int]:
    # product scanning: column c collects x[i]*y[c-i]
    ta, tb = len(x), len(y)
    ry = y[::-1]
    columns = []
    for c in range(ta + tb - 1):
        lo = max(0, c - tb + 1)
        hi = min(c, ta - 1) + 1
        start = tb - 1 - c + lo
        columns.append(sum(map(mul, x[lo:hi], ry[start : start + hi - lo])))
    return columns


def mul_schoolbook(a: BigUint, b: BigUint) -> BigUint:
    """Exact product by product-scanning schoolbook multiplication."""
    w = _same_width(a, b)
    x, y = a.limbs, b.limbs
    if not x or not y:
        return _raw((), w)
    if len(x) == 1 and len(y) == 1:
        p = x[0] * y[0]
        hi = p >> w
        return _raw((p & ((1 << w) - 1), hi) if hi else (p,), w)
    g = _group(w)
    x = _pack(a.limbs, w, g)
    y = _pack(b.limbs, w, g)
    if len(x) == 1 and len(y) == 1:
        return _raw(_unpack([x[0] * y[0]], w, 2 * g), w)
    digits = _propagate(_mul_digits(x, y), w * g)
    return _raw(_unpack(digits, w, g), w)


def div_floor(a: BigUint, b: BigUint) -> tuple[BigUint, BigUint]:
    """(quotient, remainder) with a = q·b + r and 0 <= r < b."""
    w = _same_width(a, b)
    if not b.limbs:
        raise ZeroDivisionError("division by zero BigUint")
    if cmp(a, b) < 0:
        return _raw((), w), a
    g = _group(w)
    q, r = _divmod_digits(_pack(a.limbs, w, g), _trim(_pack(b.limbs, w, g)), w * g)
    return _raw(_unpack(q, w, g), w), _raw(_unpack(r, w, g), w)


def _divmod_digits(u: list[int], v: Sequence[int], w: int) -> tuple[list[int], list[int]]:
    """Knuth's Algorithm D in base 2^w; short division for one-digit v."""
    base = 1 << w
    mask = base - 1
    u = list(_trim(u))

    if len(v) == 1:
        d = v[0]
        q = [0] * len(u)
        rem = 0
        for i in range(len(u) - 1, -1, -1):
            q[i], rem = divmod((rem << w) | u[i], d)
        return q, [rem]

    n = len(v)
    m = len(u) - n
    s = w - v[-1].bit_length()
    vn = _shift_digits(v, s, w)[:n]
    un = _shift_digits(u, s, w)
    un.extend([0] * (m + n + 1 - len(un)))
    v_top, v_next = vn[n - 1], vn[n - 2]
    q = [0] * (m + 1)

    for j in range(m, -1, -1):
        qhat, rhat = divmod((un[j + n] << w) | un[j + n - 1], v_top)
        while qhat >= base or qhat * v_next > ((rhat << w) | un[j + n - 2]):
            qhat -= 1
            rhat += v_top
            if rhat >= base:
                break
        borrow = 0
        for i in range(n):
            p = qhat * vn[i]
            t = un[i + j] - borrow - (p & mask)
            un[i + j] = t & mask
            borrow = (p >> w) - (t >> w)
        t = un[j + n] - borrow
        un[j + n] = t & mask
        if t < 0:
            # qhat was one too large: add the divisor back
            qhat -= 1
            carry = 0
            for i in range(n):
                t = un[i + j] + vn[i] + carry
                un[i + j] = t & mask
                carry = t >> w
            un[j + n] = (un[j + n] + carry) & mask
        q[j] = qhat

    rem = un[:n]
    if s:
        rem = [((lo >> s) | (hi << (w - s))) & mask for lo, hi in zip(rem, rem[1:] + [0])]
    return q, rem


def _shift_digits(x: Sequence[int], s: int, w: int) -> list[int]:
    if not s:
        return list(x)
    mask = (1 << w) - 1
    out = []
    carry = 0
    for d in x:
        out.append(((d << s) | carry) & mask)
        carry = d >> (w - s)
    out.append(carry)
    return out
