"""Baseline cost models, configuration files and the report tables.

Settings bundle the architecture config, the accelerator's own area and the
baseline designs it is compared against. They load from a JSON document::

    {
      "arch": {"macro_count": 2, "clock_mhz": 400.0, "grouping": "auto"},
      "area_mm2": 0.11,
      "baselines": {"ModSRAM": {"clock_mhz": 420.0}}
    }

Every key is optional; missing values keep the defaults below. The default
path comes from the ``LAMOS_CONFIG`` environment variable when set.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import InvalidParameterError
from .scheduler import ArchConfig, CycleBreakdown, cycles_modmul, latency_ns

CONFIG_ENV = "LAMOS_CONFIG"
DESIGN_NAME = "LaMoS"
REFERENCE_DESIGN = "ModSRAM"
DEFAULT_AREA_MM2 = 0.11


@dataclass(frozen=True)
class BaselineModel:
    """Baseline design: cycles(n) = cycles_ref * (n / reference_bits) ** exponent.

    ``exponent`` 0 means only a single reported point exists; such designs
    are tabulated at ``reference_bits`` only.
    """

    name: str
    cycles_ref: int
    clock_mhz: float
    area_mm2: float
    reference_bits: int = 256
    exponent: int = 0

    def __post_init__(self) -> None:
        if self.cycles_ref < 1 or self.reference_bits < 1 or self.exponent < 0:
            raise InvalidParameterError(f"{self.name}: cycles and reference bits must be positive")
        if not (self.clock_mhz > 0 and self.area_mm2 > 0):
            raise InvalidParameterError(f"{self.name}: clock and area must be positive")

    def cycles(self, n: int) -> int:
        if n < 1:
            raise InvalidParameterError("n must be >= 1")
        return math.ceil(self.cycles_ref * Fraction(n, self.reference_bits) ** self.exponent)

    def covers(self, n: int) -> bool:
        return self.exponent > 0 or n == self.reference_bits

    def as_dict(self) -> dict:
        return {
            "cycles_ref": self.cycles_ref,
            "clock_mhz": self.clock_mhz,
            "area_mm2": self.area_mm2,
            "reference_bits": self.reference_bits,
            "exponent": self.exponent,
        }


DEFAULT_BASELINES: tuple[BaselineModel, ...] = (
    # quadratic model calibrated to 767 cycles at 256 bits
    BaselineModel("ModSRAM", 767, 420.0, 0.053, exponent=2),
    BaselineModel("MeNTT", 66049, 151.0, 0.36),
    BaselineModel("BP-NTT", 4395, 3800.0, 0.063),
)


@dataclass(frozen=True)
class Settings:
    arch: ArchConfig = field(default_factory=ArchConfig)
    area_mm2: float = DEFAULT_AREA_MM2
    baselines: tuple[BaselineModel, ...] = DEFAULT_BASELINES

    def baseline(self, name: str) -> BaselineModel:
        for b in self.baselines:
            if b.name == name:
                return b
        raise InvalidParameterError(f"unknown baseline {name!r}")

    def with_arch(self, **changes) -> Settings:
        changes = {k: v for k, v in changes.items() if v is not None}
        return replace(self, arch=replace(self.arch, **changes)) if changes else self

    def as_dict(self) -> dict:
        return {
            "arch": self.arch.as_dict(),
            "area_mm2": self.area_mm2,
            "baselines": {b.name: b.as_dict() for b in self.baselines},
        }


_ARCH_KEYS = {"macro_count", "grouping", "tile_rows", "tile_lanes", "overhead_cycles", "clock_mhz", "timing_mode"}
_MACRO_KEYS = {"macro_rows": "rows", "macro_cols": "cols", "limb_bits": "limb_bits"}
_BASELINE_KEYS = {"cycles_ref", "clock_mhz", "area_mm2", "reference_bits", "exponent"}


def _unknown(keys: Iterable[str], allowed: Iterable[str], where: str) -> None:
    extra = sorted(set(keys) - set(allowed))
    if extra:
        raise InvalidParameterError(f"unknown {where} key(s): {', '.join(extra)}")


def settings_from_dict(doc: Mapping) -> Settings:
    """Overlay a config document on the defaults."""
    if not isinstance(doc, Mapping):
        raise InvalidParameterError("config document must be an object")
    _unknown(doc, {"arch", "area_mm2", "baselines"}, "top-level")
    arch_doc = dict(doc.get("arch", {}))
    _unknown(arch_doc, _ARCH_KEYS | set(_MACRO_KEYS), "arch")
    base = ArchConfig()
    macro_doc = {_MACRO_KEYS[k]: arch_doc.pop(k) for k in list(arch_doc) if k in _MACRO_KEYS}
    try:
        macro = replace(base.macro, **macro_doc)
        arch = replace(base, macro=macro, **arch_doc)
    except TypeError as exc:
        raise InvalidParameterError(str(exc)) from None

    baselines = {b.name: b for b in DEFAULT_BASELINES}
    for name, values in dict(doc.get("baselines", {})).items():
        _unknown(values, _BASELINE_KEYS, f"baseline {name}")
        if name in baselines:
            baselines[name] = replace(baselines[name], **values)
        else:
            baselines[name] = BaselineModel(name=name, **values)
    area = float(doc.get("area_mm2", DEFAULT_AREA_MM2))
    if not area > 0:
        raise InvalidParameterError("area_mm2 must be > 0")
    return Settings(arch=arch, area_mm2=area, baselines=tuple(baselines.values()))


def load_settings(path: Union[str, Path, None] = None) -> Settings:
    """Settings from ``path``, else from $LAMOS_CONFIG, else the defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return Settings()
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"config {path} is not valid JSON: {exc}") from None
    return settings_from_dict(doc)


@dataclass(frozen=True)
class ReportRow:
    design: str
    n: int
    m: Optional[int]
    cycles: int
    latency_ns: float
    area_mm2: float
    speedup: Optional[float] = None

    @property
    def latency_area(self) -> float:
        """Latency x area in us * mm^2."""
        return self.latency_ns * 1e-3 * self.area_mm2

    @property
    def ops_per_mm2(self) -> float:
        """Modular multiplications per second per mm^2."""
        return 1e9 / self.latency_ns / self.area_mm2

    def as_dict(self) -> dict:
        return {
            "design": self.design,
            "n": self.n,
            "m": self.m,
            "cycles": self.cycles,
            "latency_ns": self.latency_ns,
            "area_mm2": self.area_mm2,
            "latency_area": self.latency_area,
            "ops_per_mm2": self.ops_per_mm2,
            "speedup": self.speedup,
        }


def design_row(n: int, settings: Settings) -> ReportRow:
    cycles = cycles_modmul(n, settings.arch).total
    return ReportRow(DESIGN_NAME, n, settings.arch.macro_count, cycles, latency_ns(cycles, settings.arch.clock_mhz), settings.area_mm2)


def baseline_row(model: BaselineModel, n: int) -> ReportRow:
    cycles = model.cycles(n)
    return ReportRow(model.name, n, None, cycles, latency_ns(cycles, model.clock_mhz), model.area_mm2)


def compare_rows(bitwidths: Sequence[int], settings: Settings = Settings()) -> list[ReportRow]:
    """Design and baseline rows per bit width, with speedup over the reference design."""
    rows = []
    for n in bitwidths:
        group = [design_row(n, settings)]
        group += [baseline_row(b, n) for b in settings.baselines if b.covers(n)]
        ref = next((r for r in group if r.design == REFERENCE_DESIGN), None)
        for r in group:
            speedup = ref.latency_ns / r.latency_ns if ref is not None else None
            rows.append(replace(r, speedup=speedup))
    return rows


@dataclass(frozen=True)
class Claim:
    """A threshold check on one emitted number."""

    name: str
    value: float
    bound: float
    below: bool

    @property
    def ok(self) -> bool:
        return self.value < self.bound if self.below else self.value > self.bound

    def describe(self) -> str:
        op = "<" if self.below else ">"
        return f"{'ok' if self.ok else 'FAIL'}: {self.name} = {self.value:.1f} {op} {self.bound:g}"


# scaling endpoints at 2048 bits
SCALING_BITS = 2048
DESIGN_LATENCY_CEILING_NS = 9000.0
REFERENCE_LATENCY_FLOOR_NS = 110000.0


def scaling_claims(rows: Sequence[ReportRow]) -> list[Claim]:
    claims = []
    for r in rows:
        if r.n != SCALING_BITS:
            continue
        if r.design == DESIGN_NAME:
            claims.append(Claim(f"{r.design} {r.n}-bit latency_ns", r.latency_ns, DESIGN_LATENCY_CEILING_NS, True))
        elif r.design == REFERENCE_DESIGN:
            claims.append(Claim(f"{r.design} {r.n}-bit latency_ns", r.latency_ns, REFERENCE_LATENCY_FLOOR_NS, False))
    return claims


@dataclass(frozen=True)
class AblationRow:
    n: int
    serial: int
    parallel: int
    naive: int
    grouped: int

    @property
    def parallel_speedup(self) -> float:
        return self.serial / self.parallel

    @property
    def grouping_speedup(self) -> float:
        return self.naive / self.grouped

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "cycles_m1": self.serial,
            "cycles_m2": self.parallel,
            "parallel_speedup": self.parallel_speedup,
            "cycles_naive": self.naive,
            "cycles_grouped": self.grouped,
            "grouping_speedup": self.grouping_speedup,
        }


ABLATION_BITS = (256, 512, 1024)


def ablation_rows(bitwidths: Sequence[int] = ABLATION_BITS, settings: Settings = Settings()) -> list[AblationRow]:
    """One macro vs two (grouping as configured), and naive vs grouped at two macros."""
    arch = settings.arch

    def total(**kw) -> int:
        return cycles_modmul(n, replace(arch, **kw)).total

    rows = []
    for n in bitwidths:
        rows.append(
            AblationRow(
                n=n,
                serial=total(macro_count=1),
                parallel=total(macro_count=2),
                naive=total(macro_count=2, grouping="off"),
                grouped=total(macro_count=2, grouping="on"),
            )
        )
    return rows


@dataclass(frozen=True)
class SweepRow:
    n: int
    m: int
    breakdown: CycleBreakdown
    latency_ns: float

    @property
    def cycles(self) -> int:
        return self.breakdown.total

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "cycles": self.cycles,
            "latency_ns": self.latency_ns,
            "grouped": "".join("g" if g else "-" for g in self.breakdown.grouped),
        }


def sweep_rows(bitwidths: Sequence[int], macro_counts: Sequence[int], settings: Settings = Settings()) -> list[SweepRow]:
    if not bitwidths or not macro_counts:
        raise InvalidParameterError("sweep needs at least one bit width and one macro count")
    rows = []
    for n in bitwidths:
        for m in macro_counts:
            arch = replace(settings.arch, macro_count=m)
            b = cycles_modmul(n, arch)
            rows.append(SweepRow(n, m, b, latency_ns(b.total, arch.clock_mhz)))
    return rows


def monotonicity_violations(rows: Sequence[SweepRow]) -> list[tuple[SweepRow, SweepRow]]:
    """Pairs at equal n where more macros cost more cycles."""
    bad = []
    by_n: dict[int, list[SweepRow]] = {}
    for r in rows:
        by_n.setdefault(r.n, []).append(r)
    for group in by_n.values():
        group = sorted(group, key=lambda r: r.m)
        bad += [(a, b) for a, b in zip(group, group[1:]) if b.cycles > a.cycles]
    return bad
