"""Workload mapping and the cycle model.

The input stream of a t_a x t_b limb product is a grid of
``t_a + t_b - 1`` rows (one per product column) by ``t_b`` lanes; cell
(r, j) carries a real limb product only inside the band 0 <= r - j <= t_a - 1.

Naive mapping walks the grid row by row, one macro per 32-lane slice window.
Grouped mapping cuts the grid into tile_rows x tile_lanes tiles, drops tiles
that miss the band, and spreads the surviving tile rows over all macros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, Literal, NamedTuple, Optional

from .errors import InvalidParameterError
from .macro import MacroConfig

Grouping = Literal["off", "on", "auto"]
TimingMode = Literal["paper", "strict"]

GROUPING_MODES = ("off", "on", "auto")
TIMING_MODES = ("paper", "strict")


@dataclass(frozen=True)
class ArchConfig:
    """Architecture parameters; defaults describe the two-macro design at 400 MHz.

    ``grouping``: ``off`` always maps naively, ``on`` always uses tile
    grouping, ``auto`` uses grouping only when it costs no more cycles.
    """

    macro_count: int = 2
    macro: MacroConfig = field(default_factory=MacroConfig)
    grouping: Grouping = "auto"
    tile_rows: int = 32
    tile_lanes: int = 16
    overhead_cycles: int = 8
    clock_mhz: float = 400.0
    timing_mode: TimingMode = "paper"

    def __post_init__(self) -> None:
        if self.macro_count < 1:
            raise InvalidParameterError("macro_count must be >= 1")
        if self.tile_rows < 1 or self.tile_lanes < 1:
            raise InvalidParameterError("tile dimensions must be >= 1")
        if self.overhead_cycles < 0:
            raise InvalidParameterError("overhead_cycles must be >= 0")
        if not self.clock_mhz > 0:
            raise InvalidParameterError("clock_mhz must be > 0")
        if self.grouping not in GROUPING_MODES:
            raise InvalidParameterError(f"grouping must be one of {GROUPING_MODES}")
        if self.timing_mode not in TIMING_MODES:
            raise InvalidParameterError(f"timing_mode must be one of {TIMING_MODES}")

    @property
    def lanes(self) -> int:
        return self.macro.lanes

    @property
    def limb_bits(self) -> int:
        return self.macro.limb_bits

    def as_dict(self) -> dict:
        return {
            "macro_count": self.macro_count,
            "macro_rows": self.macro.rows,
            "macro_cols": self.macro.cols,
            "limb_bits": self.macro.limb_bits,
            "grouping": self.grouping,
            "tile_rows": self.tile_rows,
            "tile_lanes": self.tile_lanes,
            "overhead_cycles": self.overhead_cycles,
            "clock_mhz": self.clock_mhz,
            "timing_mode": self.timing_mode,
        }


@dataclass(frozen=True)
class TileGrid:
    t_a: int
    t_b: int
    tile_rows: int
    tile_lanes: int
    nonzero_tiles: tuple[tuple[int, int], ...]

    @property
    def grid_rows(self) -> int:
        return self.t_a + self.t_b - 1

    @property
    def grid_lanes(self) -> int:
        return self.t_b

    @property
    def n_tile_rows(self) -> int:
        return -(-self.grid_rows // self.tile_rows)

    @property
    def n_tile_lanes(self) -> int:
        return -(-self.grid_lanes // self.tile_lanes)

    @property
    def n_tiles(self) -> int:
        return self.n_tile_rows * self.n_tile_lanes

    @property
    def n_zero_tiles(self) -> int:
        return self.n_tiles - len(self.nonzero_tiles)

    @property
    def reduction(self) -> float:
        """Fraction of tiles eliminated."""
        return self.n_zero_tiles / self.n_tiles

    def tiles(self) -> Iterator[tuple[int, int]]:
        for R in range(self.n_tile_rows):
            for L in range(self.n_tile_lanes):
                yield R, L

    def tile_bounds(self, R: int, L: int) -> tuple[range, range]:
        """Row and lane ranges of tile (R, L), clipped to the grid."""
        rows = range(R * self.tile_rows, min((R + 1) * self.tile_rows, self.grid_rows))
        lanes = range(L * self.tile_lanes, min((L + 1) * self.tile_lanes, self.grid_lanes))
        return rows, lanes

    def is_nonzero(self, R: int, L: int) -> bool:
        return (R, L) in self._nonzero_set

    @cached_property
    def _nonzero_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.nonzero_tiles)


def tile_touches_band(rows: range, lanes: range, t_a: int) -> bool:
    # r - j over the tile spans [rows.start - lanes[-1], rows[-1] - lanes.start]
    lo = rows.start - lanes[-1]
    hi = rows[-1] - lanes.start
    return not (hi < 0 or lo > t_a - 1)


@lru_cache(maxsize=256)
def build_tile_grid(
    t: int, tile_rows: int = 32, tile_lanes: int = 16, t_b: Optional[int] = None
) -> TileGrid:
    """Partition the stream grid of a t x t_b product and find the band tiles.

    ``t`` is the streamed operand's limb count; ``t_b`` defaults to ``t``.
    """
    t_b = t if t_b is None else t_b
    if t < 1 or t_b < 1:
        raise InvalidParameterError("limb counts must be >= 1")
    if tile_rows < 1 or tile_lanes < 1:
        raise InvalidParameterError("tile dimensions must be >= 1")
    shell = TileGrid(t, t_b, tile_rows, tile_lanes, ())
    nonzero = tuple(
        (R, L) for R, L in shell.tiles() if tile_touches_band(*shell.tile_bounds(R, L), t)
    )
    return TileGrid(t, t_b, tile_rows, tile_lanes, nonzero)


def cycles_mult_naive(t: int, cfg: ArchConfig, t_b: Optional[int] = None) -> int:
    """ceil((t_a + t_b - 1) * ceil(t_b / lanes) / m): one slice MAC per macro-cycle."""
    t_b = t if t_b is None else t_b
    work = (t + t_b - 1) * cfg.macro.slices_for(t_b)
    return -(-work // cfg.macro_count)


def cycles_mult_grouped(t: int, cfg: ArchConfig, t_b: Optional[int] = None) -> int:
    """Surviving tile work at a throughput of lanes * m limb-MACs per cycle."""
    grid = build_tile_grid(t, cfg.tile_rows, cfg.tile_lanes, t_b)
    work = len(grid.nonzero_tiles) * cfg.tile_rows * cfg.tile_lanes
    return -(-work // (cfg.lanes * cfg.macro_count))


def use_grouping(t: int, cfg: ArchConfig, t_b: Optional[int] = None) -> bool:
    if cfg.grouping == "off":
        return False
    if cfg.grouping == "on":
        return True
    return cycles_mult_grouped(t, cfg, t_b) <= cycles_mult_naive(t, cfg, t_b)


def cycles_mult(t: int, cfg: ArchConfig, t_b: Optional[int] = None) -> tuple[int, bool]:
    """(cycles, grouped) for one multiplication under the config's grouping mode."""
    grouped = use_grouping(t, cfg, t_b)
    if grouped:
        return cycles_mult_grouped(t, cfg, t_b), True
    return cycles_mult_naive(t, cfg, t_b), False


class PhaseShape(NamedTuple):
    t_a: int
    t_b: int


def phase_shapes(n: int, limb_bits: int, timing_mode: TimingMode) -> tuple[PhaseShape, ...]:
    """Operand limb counts charged for the three multiplications.

    ``paper`` charges t x t for all three (the fixed-overhead accounting);
    ``strict`` uses the hardware widths: floor(C / 2^(n-1)) has n+1 bits,
    M' up to n+2 bits.
    """
    t = -(-n // limb_bits)
    if timing_mode == "paper":
        return (PhaseShape(t, t),) * 3
    wide = -(-(n + 2) // limb_bits)
    top = -(-(n + 1) // limb_bits)
    return PhaseShape(t, t), PhaseShape(top, wide), PhaseShape(t, t)


@dataclass(frozen=True)
class CycleBreakdown:
    n: int
    mult: tuple[int, int, int]
    grouped: tuple[bool, bool, bool]
    overhead: int
    timing_mode: TimingMode

    @property
    def total(self) -> int:
        return sum(self.mult) + self.overhead


def cycles_modmul(n: int, cfg: ArchConfig) -> CycleBreakdown:
    """Three multiplications plus the fixed non-multiplication overhead."""
    if n < 1 or n % cfg.limb_bits:
        raise InvalidParameterError(f"n must be a positive multiple of {cfg.limb_bits}, got {n}")
    counts = [cycles_mult(shape.t_a, cfg, shape.t_b) for shape in phase_shapes(n, cfg.limb_bits, cfg.timing_mode)]
    return CycleBreakdown(
        n=n,
        mult=tuple(c for c, _ in counts),
        grouped=tuple(g for _, g in counts),
        overhead=cfg.overhead_cycles,
        timing_mode=cfg.timing_mode,
    )


def latency_ns(cycles: int, clock_mhz: float) -> float:
    if not clock_mhz > 0:
        raise InvalidParameterError("clock_mhz must be > 0")
    return cycles * 1000.0 / clock_mhz


class Assignment(NamedTuple):
    cycle: int
    macro: int
    row: int
    lane_lo: int
    lane_hi: int


@dataclass(frozen=True)
class Schedule:
    t_a: int
    t_b: int
    macro_count: int
    grouped: bool
    assignments: tuple[Assignment, ...]
    total_cycles: int

    def dump(self) -> str:
        """One ``cycle,macro,row,lane_lo,lane_hi`` line per assignment."""
        return "".join(f"{a.cycle},{a.macro},{a.row},{a.lane_lo},{a.lane_hi}\n" for a in self.assignments)


def build_schedule(
    t_a: int, t_b: int, cfg: ArchConfig, grouped: Optional[bool] = None
) -> Schedule:
    """Per-cycle macro assignments for a t_a x t_b product.

    Naive: work items (row, slice) in row-major order, dealt to macros
    round-robin, so one super-cycle covers m consecutive columns when the
    operand fits one slice. Grouped: rows of surviving tiles, tile by tile,
    packed lanes // tile_lanes windows per macro per cycle. Tile rows past
    the end of the grid still take a slot, matching the cycle formula.
    """
    if t_a < 1 or t_b < 1:
        raise InvalidParameterError("limb counts must be >= 1")
    if grouped is None:
        grouped = use_grouping(t_a, cfg, t_b)
    m = cfg.macro_count
    lanes = cfg.lanes
    out: list[Assignment] = []

    if not grouped:
        n_slices = cfg.macro.slices_for(t_b)
        k = 0
        for r in range(t_a + t_b - 1):
            for s in range(n_slices):
                out.append(Assignment(k // m, k % m, r, s * lanes, min((s + 1) * lanes, t_b)))
                k += 1
        total = -(-k // m)
        return Schedule(t_a, t_b, m, False, tuple(out), total)

    if lanes % cfg.tile_lanes:
        raise InvalidParameterError(
            f"grouped schedule needs tile_lanes ({cfg.tile_lanes}) to divide lanes ({lanes})"
        )
    per_macro = lanes // cfg.tile_lanes
    per_cycle = per_macro * m
    grid = build_tile_grid(t_a, cfg.tile_rows, cfg.tile_lanes, t_b)
    slot = 0
    for R, L in grid.nonzero_tiles:
        lane_lo = L * cfg.tile_lanes
        lane_hi = min(lane_lo + cfg.tile_lanes, t_b)
        for r in range(R * cfg.tile_rows, (R + 1) * cfg.tile_rows):
            if r < grid.grid_rows:
                out.append(Assignment(slot // per_cycle, (slot % per_cycle) // per_macro, r, lane_lo, lane_hi))
            slot += 1
    total = -(-slot // per_cycle)
    return Schedule(t_a, t_b, m, True, tuple(out), total)
