"""Barrett modular multiplication on a simulated SRAM compute-in-memory accelerator.

Layers, bottom up: limb integers (:mod:`.bigint`), the functional Barrett
engine (:mod:`.barrett`), the MAC macro and accumulator models, the
workload mapper and cycle model (:mod:`.scheduler`), the datapath simulator
(:mod:`.datapath`), and the experiment tables behind the ``lamos`` CLI.
"""

from .accumulator import Accumulator, carry_bound
from .barrett import BarrettContext, ModMulTrace, barrett_modmul, precompute_context, refine
from .bigint import BigUint, decompose, div_floor, mul_schoolbook, recompose
from .datapath import CycleReport, SimResult, SimTrace, multiply, simulate_modmul, simulate_modmul_batch
from .errors import (
    ContractViolation,
    InvalidModulusError,
    InvalidParameterError,
    LamosError,
    OutOfRangeError,
    UnderflowError,
)
from .experiments import BaselineModel, ReportRow, Settings, compare_rows, load_settings
from .macro import MacroConfig
from .scheduler import ArchConfig, build_schedule, build_tile_grid, cycles_modmul

__all__ = [
    "Accumulator",
    "ArchConfig",
    "BarrettContext",
    "BaselineModel",
    "BigUint",
    "ContractViolation",
    "CycleReport",
    "InvalidModulusError",
    "InvalidParameterError",
    "LamosError",
    "MacroConfig",
    "ModMulTrace",
    "OutOfRangeError",
    "ReportRow",
    "Settings",
    "SimResult",
    "SimTrace",
    "UnderflowError",
    "barrett_modmul",
    "build_schedule",
    "build_tile_grid",
    "carry_bound",
    "compare_rows",
    "cycles_modmul",
    "decompose",
    "div_floor",
    "load_settings",
    "multiply",
    "precompute_context",
    "recompose",
    "refine",
    "simulate_modmul",
    "simulate_modmul_batch",
]

__version__ = "0.1.0"
