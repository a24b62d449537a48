"""Transaction-level simulation of one modular multiplication on the CiM datapath.

The three Barrett multiplications run through simulated macros and per-slice
accumulators:

1. A streams against resident B                      -> C buffer
2. floor(C / 2^(n-1)) streams against resident M'    -> u buffer
3. E = floor(u / 2^(n+1)) streams against resident M -> P

then the subtractor forms T = C - P and refines it into [0, M).

Every 32-lane slice of the resident operand owns a split-carry accumulator.
Slice streams already carry global column weights, so the slice partial
products are summed without shifting.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import bigint as bi
from .accumulator import Accumulator, carry_bound, run_lockstep
from .barrett import BarrettContext, IntLike, ModMulTrace, as_biguint, refine
from .bigint import BigUint
from .errors import ContractViolation, InvalidParameterError, OutOfRangeError
from .macro import MacHook, gen_input_stream, mac_cycle, store_operand, stream_grid
from .scheduler import (
    ArchConfig,
    CycleBreakdown,
    TileGrid,
    build_schedule,
    build_tile_grid,
    cycles_modmul,
    latency_ns,
    phase_shapes,
    use_grouping,
)

TRACE_SCHEMA = "lamos.trace/1"


@dataclass(frozen=True)
class PhaseResult:
    name: str
    operand: BigUint
    resident: BigUint
    t_a: int
    t_b: int
    grouped: bool
    product: BigUint
    mac_events: int
    max_mac: int
    max_carry: int

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "t_a": self.t_a,
            "t_b": self.t_b,
            "grouped": self.grouped,
            "mac_events": self.mac_events,
            "max_mac": self.max_mac,
            "max_carry": self.max_carry,
            "product": self.product.to_hex(),
        }


@lru_cache(maxsize=64)
def _tile_mask(tiles: TileGrid) -> np.ndarray:
    """Per (row, tile-lane) flag: True where the cell's tile survives."""
    keep = np.zeros((tiles.n_tile_rows, tiles.n_tile_lanes), dtype=bool)
    for R, L in tiles.nonzero_tiles:
        keep[R, L] = True
    keep = np.repeat(keep, tiles.tile_rows, axis=0)[: tiles.grid_rows]
    keep.flags.writeable = False
    return keep


def _limb_matrix(values: Sequence[BigUint], count: int, dtype) -> np.ndarray:
    return np.array([v.padded(count) for v in values], dtype=dtype).reshape(len(values), count)


def _slice_columns_fast(
    a_vals: Sequence[BigUint], b_vals: Sequence[BigUint], t_a: int, t_b: int, cfg: ArchConfig, grouped: bool
) -> tuple[np.ndarray, int, np.ndarray]:
    """Per-slice column sums for a batch, shape (K, rows, slices), by array math.

    Also returns the MAC event count per case and each case's largest MAC
    result.
    """
    macro = cfg.macro
    lanes = macro.lanes
    n_slices = macro.slices_for(t_b)
    rows = t_a + t_b - 1
    k = len(a_vals)
    # a full MAC result fits 32 bits for every geometry the MAC contract allows
    dtype = np.int32 if macro.mac_out_bits <= 31 else np.int64
    resident = np.zeros((k, n_slices * lanes), dtype=dtype)
    resident[:, :t_b] = _limb_matrix(b_vals, t_b, dtype)
    products = stream_grid(_limb_matrix(a_vals, t_a, dtype), t_b, macro, mask_idle=False) * resident[:, None, :]

    if not grouped:
        macs = products.reshape(k, rows, n_slices, lanes).sum(axis=3, dtype=np.int64)
        return macs, rows * n_slices, macs.max(axis=(1, 2))

    tl = cfg.tile_lanes
    if lanes % tl:
        raise InvalidParameterError(f"tile_lanes ({tl}) must divide lanes ({lanes})")
    per = lanes // tl
    tiles = build_tile_grid(t_a, cfg.tile_rows, tl, t_b)
    n_l = tiles.n_tile_lanes
    windows = products[:, :, : n_l * tl].reshape(k, rows, n_l, tl).sum(axis=3, dtype=np.int64)
    keep = _tile_mask(tiles)
    if windows[:, ~keep].any():
        raise ContractViolation("a discarded tile holds a nonzero limb product")
    padded = np.zeros((k, rows, n_slices * per), dtype=np.int64)
    padded[:, :, :n_l] = windows * keep
    cols = padded.reshape(k, rows, n_slices, per).sum(axis=3)
    return cols, int(keep.sum()), windows.max(axis=(1, 2))


def _slice_columns_stepwise(
    a: BigUint, b: BigUint, t_a: int, t_b: int, cfg: ArchConfig, grouped: bool, hook: Optional[MacHook]
) -> tuple[np.ndarray, int, int]:
    """Per-slice column sums (rows, slices) by executing the schedule one MAC at a time."""
    macro = cfg.macro
    lanes = macro.lanes
    state = store_operand(macro, b, t_b)
    stream = gen_input_stream(a, t_b, macro, t_a)
    schedule = build_schedule(t_a, t_b, cfg, grouped)
    cols = np.zeros((stream.n_rows, stream.n_slices), dtype=np.int64)
    peak = 0
    for asg in schedule.assignments:
        s = asg.lane_lo // lanes
        lo, hi = asg.lane_lo - s * lanes, asg.lane_hi - s * lanes
        vector = stream.lane_vector(asg.row, s)
        inputs = tuple(v if lo <= j < hi else 0 for j, v in enumerate(vector))
        value = mac_cycle(state, s, inputs, hook=hook, cycle=asg.cycle, macro=asg.macro)
        cols[asg.row, s] += value
        peak = max(peak, value)
    return cols, len(schedule.assignments), peak


def _accumulate(cols: np.ndarray, cfg: ArchConfig, grouped: bool) -> list[tuple[BigUint, int]]:
    """Run the peripheral accumulators over (K, rows, slices) column sums.

    Returns (product, largest carry) per case.
    """
    k, rows, n_slices = cols.shape
    w = cfg.limb_bits
    mac_limit = 1 << cfg.macro.mac_out_bits
    limit = carry_bound(cfg.lanes, w)
    out = []
    if not grouped and n_slices == 1:
        # m macros compute m consecutive columns per super-cycle; the adder
        # tree merges them before the accumulator
        for case in cols[:, :, 0].tolist():
            acc = Accumulator(w, carry_limit=limit, col_limit=mac_limit)
            acc.run(case, cfg.macro_count)
            acc.flush(rows + 1)
            out.append((BigUint.from_limbs(acc.emitted, w), acc.max_carry))
        return out

    streams = cols.transpose(1, 0, 2).reshape(rows, k * n_slices)
    emitted, carries = run_lockstep(streams, w, carry_limit=limit, col_limit=mac_limit)
    # slice partial products share column weights: add them position-wise
    position_sums = emitted.reshape(rows, k, n_slices).sum(axis=2)
    final = carries[-1].reshape(k, n_slices).sum(axis=1)
    peaks = carries.reshape(rows, k, n_slices).max(axis=(0, 2))
    for i in range(k):
        columns = position_sums[:, i].tolist()
        columns.append(int(final[i]))
        out.append((bi.propagate_columns(columns, w), int(peaks[i])))
    return out


def multiply_batch(
    a_vals: Sequence[IntLike],
    b_vals: Sequence[IntLike],
    t_a: int,
    t_b: int,
    cfg: ArchConfig,
    *,
    grouped: Optional[bool] = None,
    name: str = "mult",
) -> list[PhaseResult]:
    """Independent t_a x t_b limb products evaluated together with array arithmetic."""
    w = cfg.limb_bits
    a_vals = [as_biguint(x, w) for x in a_vals]
    b_vals = [as_biguint(x, w) for x in b_vals]
    if len(a_vals) != len(b_vals):
        raise InvalidParameterError("operand lists differ in length")
    if not a_vals:
        return []
    if grouped is None:
        grouped = use_grouping(t_a, cfg, t_b)
    results: list[PhaseResult] = []
    width = cfg.macro.slices_for(t_b) * cfg.lanes
    chunk = max(1, _BATCH_CELLS // ((t_a + t_b - 1) * width))
    for lo in range(0, len(a_vals), chunk):
        a_part, b_part = a_vals[lo : lo + chunk], b_vals[lo : lo + chunk]
        cols, events, max_macs = _slice_columns_fast(a_part, b_part, t_a, t_b, cfg, grouped)
        _check_mac(int(max_macs.max()), cfg)
        for a, b, mx, (product, carry) in zip(a_part, b_part, max_macs.tolist(), _accumulate(cols, cfg, grouped)):
            results.append(PhaseResult(name, a, b, t_a, t_b, grouped, product, events, mx, carry))
    return results


# cells of stream grid evaluated per array pass
_BATCH_CELLS = 1 << 21


def _check_mac(value: int, cfg: ArchConfig) -> None:
    if value >> cfg.macro.mac_out_bits:
        raise ContractViolation(f"MAC result {value} exceeds {cfg.macro.mac_out_bits} bits")


def multiply(
    a: IntLike,
    b: IntLike,
    t_a: int,
    t_b: int,
    cfg: ArchConfig,
    *,
    grouped: Optional[bool] = None,
    stepwise: bool = False,
    hook: Optional[MacHook] = None,
    name: str = "mult",
) -> PhaseResult:
    """One t_a x t_b limb product through macros and accumulators.

    The default path evaluates the whole stream with array arithmetic;
    ``stepwise`` (implied by ``hook``) walks the schedule MAC by MAC.
    """
    if not (stepwise or hook is not None):
        return multiply_batch([a], [b], t_a, t_b, cfg, grouped=grouped, name=name)[0]
    w = cfg.limb_bits
    a = as_biguint(a, w)
    b = as_biguint(b, w)
    if grouped is None:
        grouped = use_grouping(t_a, cfg, t_b)
    cols, events, max_mac = _slice_columns_stepwise(a, b, t_a, t_b, cfg, grouped, hook)
    _check_mac(max_mac, cfg)
    ((product, carry),) = _accumulate(cols[None], cfg, grouped)
    return PhaseResult(name, a, b, t_a, t_b, grouped, product, events, max_mac, carry)


def extract_shifted(x: BigUint, k: int) -> BigUint:
    """Shift-array routing: floor(x / 2^k)."""
    return bi.shr(x, k)


def subtract_and_refine(c: BigUint, p: BigUint, modulus: BigUint) -> tuple[BigUint, BigUint, int]:
    """(T, R, refine_count) with T = C - P and R = T mod M, at most two subtractions."""
    if bi.cmp(c, p) < 0:
        raise ContractViolation("P > C: quotient estimate overshoots")
    t = bi.sub(c, p)
    r, count = refine(t, modulus)
    return t, r, count


@dataclass(frozen=True)
class CycleReport:
    mult: tuple[int, int, int]
    overhead: int
    latency_ns: float
    timing_mode: str
    grouped: tuple[bool, bool, bool]
    config: dict

    @property
    def total(self) -> int:
        return sum(self.mult) + self.overhead

    @property
    def mult1(self) -> int:
        return self.mult[0]

    @property
    def mult2(self) -> int:
        return self.mult[1]

    @property
    def mult3(self) -> int:
        return self.mult[2]

    @classmethod
    def from_breakdown(cls, breakdown: CycleBreakdown, cfg: ArchConfig) -> CycleReport:
        return cls(
            mult=breakdown.mult,
            overhead=breakdown.overhead,
            latency_ns=latency_ns(breakdown.total, cfg.clock_mhz),
            timing_mode=breakdown.timing_mode,
            grouped=breakdown.grouped,
            config=cfg.as_dict(),
        )

    def as_dict(self) -> dict:
        return {
            "mult1": self.mult1,
            "mult2": self.mult2,
            "mult3": self.mult3,
            "overhead": self.overhead,
            "total": self.total,
            "latency_ns": self.latency_ns,
            "timing_mode": self.timing_mode,
            "grouped": list(self.grouped),
            "config": self.config,
        }


def cycle_report(n: int, cfg: ArchConfig) -> CycleReport:
    return CycleReport.from_breakdown(cycles_modmul(n, cfg), cfg)


@dataclass(frozen=True)
class SimTrace:
    modmul: ModMulTrace
    phases: tuple[PhaseResult, PhaseResult, PhaseResult]
    input_buffer: tuple[BigUint, BigUint, BigUint]
    c_buffer: BigUint
    u_buffer: BigUint

    @property
    def max_carry(self) -> int:
        return max(p.max_carry for p in self.phases)


@dataclass(frozen=True)
class SimResult:
    r: BigUint
    trace: SimTrace
    report: CycleReport

    def to_json_dict(self, ctx: BarrettContext, a: BigUint, b: BigUint) -> dict:
        return {
            "schema": TRACE_SCHEMA,
            "n": ctx.n,
            "modulus": ctx.modulus.to_hex(),
            "m_prime": ctx.m_prime.to_hex(),
            "A": a.to_hex(),
            "B": b.to_hex(),
            "intermediates": self.trace.modmul.as_dict(),
            "buffers": {
                "input": [x.to_hex() for x in self.trace.input_buffer],
                "C": self.trace.c_buffer.to_hex(),
                "u": self.trace.u_buffer.to_hex(),
            },
            "phases": [p.as_dict() for p in self.trace.phases],
            "cycles": self.report.as_dict(),
        }


def _check_operands(ctx: BarrettContext, a: IntLike, b: IntLike, cfg: ArchConfig) -> tuple[BigUint, BigUint]:
    w = cfg.limb_bits
    if ctx.width != w:
        raise InvalidParameterError(f"context limb width {ctx.width} != datapath limb width {w}")
    if ctx.n % w:
        raise InvalidParameterError(f"n={ctx.n} is not a multiple of the limb width {w}")
    a = as_biguint(a, w)
    b = as_biguint(b, w)
    if bi.cmp(a, ctx.modulus) >= 0 or bi.cmp(b, ctx.modulus) >= 0:
        raise OutOfRangeError("operands must satisfy A, B < M")
    return a, b


def simulate_modmul_batch(
    cases: Sequence[tuple[BarrettContext, IntLike, IntLike]],
    cfg: ArchConfig = ArchConfig(),
) -> list[SimResult]:
    """Simulate many (context, A, B) cases of the same bit width together.

    Each case may use its own modulus. Results match running
    :func:`simulate_modmul` on every case.
    """
    if not cases:
        return []
    n = cases[0][0].n
    if any(ctx.n != n for ctx, _, _ in cases):
        raise InvalidParameterError("batched cases must share the bit width n")
    ctxs = [ctx for ctx, _, _ in cases]
    ops = [_check_operands(ctx, a, b, cfg) for ctx, a, b in cases]
    shapes = phase_shapes(n, cfg.limb_bits, "strict")
    grouped = [use_grouping(sh.t_a, cfg, sh.t_b) for sh in shapes]

    ph1 = multiply_batch([a for a, _ in ops], [b for _, b in ops], *shapes[0], cfg, grouped=grouped[0], name="mult1")
    tops = [extract_shifted(ph.product, n - 1) for ph in ph1]
    ph2 = multiply_batch(tops, [c.m_prime for c in ctxs], *shapes[1], cfg, grouped=grouped[1], name="mult2")
    es = [extract_shifted(ph.product, n + 1) for ph in ph2]
    ph3 = multiply_batch(es, [c.modulus for c in ctxs], *shapes[2], cfg, grouped=grouped[2], name="mult3")

    report = cycle_report(n, cfg)
    out = []
    for i, ctx in enumerate(ctxs):
        out.append(_assemble(ctx, ops[i][0], (ph1[i], ph2[i], ph3[i]), report))
    return out


def _assemble(ctx: BarrettContext, a: BigUint, phases: tuple, report: CycleReport) -> SimResult:
    ph1, ph2, ph3 = phases
    c, u, p = ph1.product, ph2.product, ph3.product
    top, e = ph2.operand, ph3.operand
    t, r, count = subtract_and_refine(c, p, ctx.modulus)
    trace = SimTrace(
        modmul=ModMulTrace(c=c, u=u, e=e, p=p, t=t, refine_count=count, r=r),
        phases=(ph1, ph2, ph3),
        input_buffer=(a, top, e),
        c_buffer=c,
        u_buffer=u,
    )
    return SimResult(r=r, trace=trace, report=report)


def simulate_modmul(
    ctx: BarrettContext,
    a: IntLike,
    b: IntLike,
    cfg: ArchConfig = ArchConfig(),
    *,
    stepwise: bool = False,
    hook: Optional[MacHook] = None,
) -> SimResult:
    """Run A·B mod M through the simulated datapath.

    ``stepwise`` or a ``hook`` executes the schedule MAC by MAC; otherwise
    the array path is used.
    """
    if not (stepwise or hook is not None):
        return simulate_modmul_batch([(ctx, a, b)], cfg)[0]
    a, b = _check_operands(ctx, a, b, cfg)
    n = ctx.n
    shapes = phase_shapes(n, cfg.limb_bits, "strict")

    def run(x, y, shape, name):
        g = use_grouping(shape.t_a, cfg, shape.t_b)
        return multiply(x, y, *shape, cfg, grouped=g, stepwise=True, hook=hook, name=name)

    ph1 = run(a, b, shapes[0], "mult1")
    ph2 = run(extract_shifted(ph1.product, n - 1), ctx.m_prime, shapes[1], "mult2")
    ph3 = run(extract_shifted(ph2.product, n + 1), ctx.modulus, shapes[2], "mult3")
    return _assemble(ctx, a, (ph1, ph2, ph3), cycle_report(n, cfg))
