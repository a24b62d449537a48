"""Peripheral accumulation of per-cycle MAC results.

Each cycle's column sum has weight 2^w relative to the previous one, so the
accumulator keeps a small carry register: ``s = col + carry``, the low w bits
of ``s`` are final, and ``s >> w`` carries into the next column. With 32
lanes of 8-bit limbs the carry never exceeds 32 * 255 = 8160, which fits the
14-bit temporary register with a bit to spare.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

from .bigint import BigUint, propagate_columns
from .errors import ContractViolation, InvalidParameterError


def carry_bound(lanes: int, limb_bits: int) -> int:
    """Largest carry a column-serial accumulator can hold: lanes * (2^w - 1).

    Fixed point of c = (lanes * (2^w - 1)^2 + c) >> w.
    """
    return lanes * ((1 << limb_bits) - 1)


def aggregate_macros(col_sums: Sequence[int], limb_bits: int = 8) -> int:
    """Adder tree over m macros computing consecutive columns: Σ_k col_k · 2^(w·k)."""
    total = 0
    for k, v in enumerate(col_sums):
        total += v << (limb_bits * k)
    return total


class Accumulator:
    """Split-carry accumulator for one stream of column sums.

    ``carry_limit`` and ``col_limit`` are asserted on every step when given.
    """

    def __init__(
        self,
        limb_bits: int = 8,
        *,
        carry_limit: Optional[int] = None,
        col_limit: Optional[int] = None,
    ) -> None:
        if limb_bits < 1:
            raise InvalidParameterError("limb_bits must be >= 1")
        self.limb_bits = limb_bits
        self.carry_limit = carry_limit
        self.col_limit = col_limit
        self.carry = 0
        self.emitted: list[int] = []
        self.max_carry = 0

    @property
    def position(self) -> int:
        return len(self.emitted)

    def _check(self, carry: int) -> None:
        if carry > self.max_carry:
            self.max_carry = carry
            if self.carry_limit is not None and carry > self.carry_limit:
                raise ContractViolation(
                    f"carry {carry} exceeds bound {self.carry_limit} at column {self.position}"
                )

    def accumulate_column(self, col_sum: int) -> int:
        """Consume one column sum; returns the finalized low limb."""
        if self.col_limit is not None and not 0 <= col_sum < self.col_limit:
            raise ContractViolation(f"column sum {col_sum} exceeds MAC output width")
        s = col_sum + self.carry
        limb = s & ((1 << self.limb_bits) - 1)
        self.emitted.append(limb)
        self.carry = s >> self.limb_bits
        self._check(self.carry)
        return limb

    def accumulate_wide(self, value: int, k: int) -> list[int]:
        """Consume an aggregated value spanning ``k`` columns; emits k limbs."""
        w = self.limb_bits
        s = value + self.carry
        mask = (1 << w) - 1
        limbs = [(s >> (w * i)) & mask for i in range(k)]
        self.emitted.extend(limbs)
        self.carry = s >> (w * k)
        self._check(self.carry)
        return limbs

    def run(self, col_sums: Iterable[int], group: int = 1) -> None:
        """Feed a whole stream, ``group`` consecutive columns per step."""
        if group > 1:
            cols = list(col_sums)
            w = self.limb_bits
            for i in range(0, len(cols), group):
                chunk = cols[i : i + group]
                if self.col_limit is not None and max(chunk) >= self.col_limit:
                    raise ContractViolation("column sum exceeds MAC output width")
                self.accumulate_wide(aggregate_macros(chunk, w), len(chunk))
            return
        # Same recurrence as accumulate_column, kept inline: this loop is the
        # simulator's hot path.
        w = self.limb_bits
        mask = (1 << w) - 1
        carry = self.carry
        peak = self.max_carry
        col_limit = self.col_limit
        out = self.emitted
        for col in col_sums:
            if col_limit is not None and col >= col_limit:
                raise ContractViolation(f"column sum {col} exceeds MAC output width")
            s = col + carry
            out.append(s & mask)
            carry = s >> w
            if carry > peak:
                peak = carry
        self.carry = carry
        if peak > self.max_carry:
            self._check(peak)

    def flush(self, total_limbs: Optional[int] = None) -> list[int]:
        """Emit the carry register as limbs, zero-padded to ``total_limbs`` overall."""
        w = self.limb_bits
        mask = (1 << w) - 1
        tail = []
        carry = self.carry
        while carry:
            tail.append(carry & mask)
            carry >>= w
        self.carry = 0
        if total_limbs is not None:
            room = total_limbs - len(self.emitted)
            if len(tail) > room:
                raise ContractViolation(f"accumulated value needs more than {total_limbs} limbs")
            tail.extend([0] * (room - len(tail)))
        self.emitted.extend(tail)
        return tail

    def value(self) -> BigUint:
        return propagate_columns(self.emitted + [self.carry], self.limb_bits)


_FIELD_BITS = 64


def run_lockstep(
    cols: np.ndarray,
    limb_bits: int = 8,
    *,
    carry_limit: Optional[int] = None,
    col_limit: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance one accumulator per column of ``cols`` (shape rows x streams) in lockstep.

    Same recurrence as :meth:`Accumulator.accumulate_column`, evaluated for
    every stream per step by packing each stream's register into a 64-bit
    field of one integer. Returns the emitted limbs and the carry after each
    step, both shaped like ``cols``.
    """
    rows, n = cols.shape
    w = limb_bits
    if rows == 0:
        return np.zeros((0, n), dtype=np.int64), np.zeros((0, n), dtype=np.int64)
    if cols.min() < 0 or (col_limit is not None and cols.max() >= col_limit):
        raise ContractViolation("column sum exceeds MAC output width")
    if int(cols.max()) + int(cols.max() >> w) * 2 >= 1 << (_FIELD_BITS - 2):
        raise InvalidParameterError("column sums too wide for the packed registers")
    nbytes = n * _FIELD_BITS // 8
    field = (1 << _FIELD_BITS) - 1
    low = int.from_bytes(np.full(n, (1 << w) - 1, dtype="<u8").tobytes(), "little")
    keep = int.from_bytes(np.full(n, field >> w, dtype="<u8").tobytes(), "little")

    raw = np.ascontiguousarray(cols, dtype="<u8").tobytes()
    frm = int.from_bytes
    packed = [frm(raw[i : i + nbytes], "little") for i in range(0, len(raw), nbytes)]
    emitted = []
    carries = []
    carry = 0
    for x in packed:
        s = x + carry
        emitted.append(s & low)
        carry = (s >> w) & keep
        carries.append(carry)

    def unpack(values: list[int]) -> np.ndarray:
        raw = b"".join([v.to_bytes(nbytes, "little") for v in values])
        return np.frombuffer(raw, dtype="<u8").reshape(len(values), n).astype(np.int64)

    carry_grid = unpack(carries)
    if carry_limit is not None and carry_grid.max() > carry_limit:
        r, i = np.argwhere(carry_grid > carry_limit)[0]
        raise ContractViolation(f"carry exceeds bound {carry_limit} at column {r}, stream {i}")
    return unpack(emitted), carry_grid
