"""Bit-exact model of one SRAM compute-in-memory MAC macro.

Operand B is resident: its limbs are laid out across ``lanes`` storage
columns, one stored row per 32-limb slice. Operand A streams in: at cycle
``r`` lane ``j`` of slice ``s`` sees limb ``a[r - (lanes*s + j)]`` (zero
outside ``[0, t_a)``), so the macro's dot product over the lanes is the
slice's contribution to product column ``r``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Optional, Sequence, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .bigint import BigUint
from .errors import ContractViolation, InvalidParameterError


@dataclass(frozen=True)
class MacroConfig:
    rows: int = 64
    cols: int = 256
    limb_bits: int = 8

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1 or self.limb_bits < 1:
            raise InvalidParameterError("macro geometry must be positive")
        if self.cols % self.limb_bits:
            raise InvalidParameterError(
                f"cols ({self.cols}) must be a multiple of limb_bits ({self.limb_bits})"
            )

    @property
    def lanes(self) -> int:
        return self.cols // self.limb_bits

    @property
    def mac_out_bits(self) -> int:
        # 8 + 8 + log2(32) = 21 for the default macro
        return 2 * self.limb_bits + math.ceil(math.log2(self.lanes))

    @property
    def limb_limit(self) -> int:
        return 1 << self.limb_bits

    def slices_for(self, t: int) -> int:
        return -(-t // self.lanes)


@dataclass(frozen=True)
class MacEvent:
    """One MAC evaluation, as reported to a trace hook."""

    cycle: int
    macro: int
    slice: int
    digest: str
    result: int


MacHook = Callable[[MacEvent], None]


def lane_digest(inputs: Sequence[int]) -> str:
    return hashlib.blake2b(",".join(map(str, inputs)).encode(), digest_size=6).hexdigest()


@dataclass(frozen=True)
class MacroState:
    config: MacroConfig
    stored: tuple[tuple[int, ...], ...]
    t_b: int

    @property
    def n_slices(self) -> int:
        return len(self.stored)

    @cached_property
    def array(self) -> np.ndarray:
        """Stored lanes flattened to length ``n_slices * lanes`` (int64)."""
        return np.array([v for row in self.stored for v in row], dtype=np.int64)


def _limbs_of(x: Union[BigUint, Sequence[int]], count: Optional[int]) -> tuple[int, ...]:
    if isinstance(x, BigUint):
        return x.padded(len(x.limbs) if count is None else count)
    limbs = tuple(x)
    if count is not None:
        if len(limbs) > count and any(limbs[count:]):
            raise InvalidParameterError(f"operand does not fit in {count} limbs")
        limbs = limbs[:count] + (0,) * (count - len(limbs))
    return limbs


def store_operand(
    cfg: MacroConfig, b: Union[BigUint, Sequence[int]], t_b: Optional[int] = None
) -> MacroState:
    """Lay out B's limbs as ceil(t_b / lanes) stored rows, zero-padding the last."""
    limbs = _limbs_of(b, t_b)
    if isinstance(b, BigUint) and b.width != cfg.limb_bits:
        raise InvalidParameterError("operand limb width differs from the macro's")
    if not limbs:
        raise InvalidParameterError("resident operand needs at least one limb")
    limit = cfg.limb_limit
    if any(not 0 <= v < limit for v in limbs):
        raise InvalidParameterError(f"stored limb outside [0, 2^{cfg.limb_bits})")
    lanes = cfg.lanes
    n = cfg.slices_for(len(limbs))
    padded = limbs + (0,) * (n * lanes - len(limbs))
    stored = tuple(padded[s * lanes : (s + 1) * lanes] for s in range(n))
    return MacroState(config=cfg, stored=stored, t_b=len(limbs))


def mac_cycle(
    state: MacroState,
    slice_index: int,
    inputs: Sequence[int],
    *,
    hook: Optional[MacHook] = None,
    cycle: int = 0,
    macro: int = 0,
) -> int:
    """Σ_j inputs[j] · stored[slice][j] for one cycle."""
    cfg = state.config
    if not 0 <= slice_index < state.n_slices:
        raise InvalidParameterError(f"slice {slice_index} not stored (have {state.n_slices})")
    if len(inputs) != cfg.lanes:
        raise InvalidParameterError(f"expected {cfg.lanes} lane inputs, got {len(inputs)}")
    limit = cfg.limb_limit
    for v in inputs:
        if not 0 <= v < limit:
            raise ContractViolation(f"input limb {v} exceeds {cfg.limb_bits} bits")
    result = sum(x * y for x, y in zip(inputs, state.stored[slice_index]))
    if result >> cfg.mac_out_bits:
        raise ContractViolation(f"MAC result {result} does not fit {cfg.mac_out_bits} bits")
    if hook is not None:
        hook(MacEvent(cycle, macro, slice_index, lane_digest(inputs), result))
    return result


@dataclass(frozen=True)
class InputStream:
    """Per-cycle lane vectors presenting operand A to the stored slices of B."""

    a: tuple[int, ...]
    t_b: int
    config: MacroConfig

    @property
    def t_a(self) -> int:
        return len(self.a)

    @property
    def n_rows(self) -> int:
        return self.t_a + self.t_b - 1

    @property
    def n_slices(self) -> int:
        return self.config.slices_for(self.t_b)

    def __len__(self) -> int:
        return self.n_rows

    def lane_vector(self, r: int, s: int) -> tuple[int, ...]:
        lanes = self.config.lanes
        base = r - lanes * s
        a, t_a = self.a, self.t_a
        # lanes past t_b face zero padding in the stored slice and stay idle
        used = min(lanes, self.t_b - lanes * s)
        return tuple(a[base - j] if j < used and 0 <= base - j < t_a else 0 for j in range(lanes))

    def row(self, r: int) -> tuple[tuple[int, ...], ...]:
        if not 0 <= r < self.n_rows:
            raise IndexError(r)
        return tuple(self.lane_vector(r, s) for s in range(self.n_slices))

    def __iter__(self) -> Iterator[tuple[tuple[int, ...], ...]]:
        for r in range(self.n_rows):
            yield self.row(r)

    def grid(self) -> np.ndarray:
        """Whole stream as an (n_rows, n_slices * lanes) int64 array."""
        return stream_grid(np.array([self.a], dtype=np.int64), self.t_b, self.config)[0]


def stream_grid(a_rows: np.ndarray, t_b: int, cfg: MacroConfig, *, mask_idle: bool = True) -> np.ndarray:
    """Input streams for a batch of streamed operands.

    ``a_rows`` has shape (K, t_a); the result has shape
    (K, t_a + t_b - 1, n_slices * lanes) with [k, r, j] = a_rows[k, r - j]
    inside the band (and j < t_b) and 0 elsewhere, in the dtype of ``a_rows``.
    With ``mask_idle=False`` lanes j >= t_b keep their band values, which
    is cheaper when the result is multiplied by zero-padded stored limbs.
    """
    k, t_a = a_rows.shape
    width = cfg.slices_for(t_b) * cfg.lanes
    n_rows = t_a + t_b - 1
    # row r, lane j reads a[r - j]: a sliding window over reversed, padded A
    ext = np.zeros((k, t_a + 2 * (width - 1)), dtype=a_rows.dtype)
    ext[:, width - 1 : width - 1 + t_a] = a_rows
    windows = sliding_window_view(ext[:, ::-1], width, axis=1)
    last = t_a + width - 2
    view = windows[:, last - n_rows + 1 : last + 1][:, ::-1]
    if t_b == width or not mask_idle:
        return view
    out = np.zeros((k, n_rows, width), dtype=a_rows.dtype)
    out[:, :, :t_b] = view[:, :, :t_b]
    return out


def gen_input_stream(
    a: Union[BigUint, Sequence[int]],
    t_b: int,
    cfg: MacroConfig,
    t_a: Optional[int] = None,
) -> InputStream:
    limbs = _limbs_of(a, t_a)
    if not limbs or t_b < 1:
        raise InvalidParameterError("t_a and t_b must be >= 1")
    limit = cfg.limb_limit
    if any(not 0 <= v < limit for v in limbs):
        raise InvalidParameterError(f"streamed limb outside [0, 2^{cfg.limb_bits})")
    return InputStream(a=limbs, t_b=t_b, config=cfg)
