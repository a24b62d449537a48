"""Oracle suites: the functional engine and the datapath against host integers.

Every suite returns a :class:`SuiteResult` with the number of cases run and
the first few counterexamples. Case lists depend only on the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Optional, Sequence

from .accumulator import carry_bound
from .bigint import decompose
from .barrett import MAX_REFINE_STEPS, BarrettContext, barrett_modmul, precompute_context
from .errors import LamosError
from .macro import MacroConfig
from .datapath import multiply_batch, simulate_modmul_batch
from .scheduler import ArchConfig

MAX_REPORTED = 10

ContextHook = Callable[[BarrettContext], BarrettContext]


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: int = 0
    examples: list[dict] = field(default_factory=list)
    max_carry: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def fail(self, **case) -> None:
        self.failures += 1
        if len(self.examples) < MAX_REPORTED:
            self.examples.append(case)

    def summary(self) -> str:
        return f"{self.name}: {self.cases} cases, {self.failures} failures"

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "cases": self.cases,
            "failures": self.failures,
            "examples": self.examples,
            "max_carry": self.max_carry,
            **({"stats": self.stats} if self.stats else {}),
        }


def _hex(x: int) -> str:
    return f"0x{x:x}"


def functional_sweep(n: int = 8, context_hook: Optional[ContextHook] = None) -> SuiteResult:
    """Every normalized n-bit M and every A, B < M through the functional engine.

    Checks R against divmod, refine_count <= 2 and a quotient gap q - E in
    {0, 1, 2}. ``context_hook`` may alter each context (fault injection).
    """
    res = SuiteResult(f"functional exhaustive n={n}")
    counts = [0] * (MAX_REFINE_STEPS + 1)
    gaps = [0, 0, 0]
    operands = [decompose(v) for v in range(1 << n)]
    for m in range(1 << (n - 1), 1 << n):
        ctx = precompute_context(m, n)
        if context_hook is not None:
            ctx = context_hook(ctx)
        for a in range(m):
            big_a = operands[a]
            for b in range(m):
                res.cases += 1
                q, r = divmod(a * b, m)
                try:
                    tr = barrett_modmul(ctx, big_a, operands[b])
                except LamosError as exc:
                    res.fail(A=_hex(a), B=_hex(b), M=_hex(m), error=str(exc))
                    continue
                gap = q - int(tr.e)
                if int(tr.r) != r or tr.refine_count > 2 or not 0 <= gap <= 2:
                    res.fail(A=_hex(a), B=_hex(b), M=_hex(m), R=_hex(int(tr.r)), expected=_hex(r),
                             refine_count=tr.refine_count, quotient_gap=gap)
                    continue
                counts[tr.refine_count] += 1
                gaps[gap] += 1
    res.stats = {"refine_count": dict(enumerate(counts)), "quotient_gap": dict(enumerate(gaps))}
    return res


def small_config(limb_bits: int = 4, grouping: str = "off") -> ArchConfig:
    return ArchConfig(macro=MacroConfig(limb_bits=limb_bits), grouping=grouping)


def product_sweep(limb_bits: int = 4, max_limbs: int = 2, groupings: Sequence[str] = ("off", "on")) -> SuiteResult:
    """Every operand pair up to ``max_limbs`` limbs per side through the simulated macros."""
    res = SuiteResult(f"datapath products w={limb_bits} t<={max_limbs}")
    limit = carry_bound(ArchConfig(macro=MacroConfig(limb_bits=limb_bits)).lanes, limb_bits)
    for grouping in groupings:
        cfg = small_config(limb_bits, grouping)
        for t_a in range(1, max_limbs + 1):
            for t_b in range(1, max_limbs + 1):
                pairs = [(a, b) for a in range(1 << (limb_bits * t_a)) for b in range(1 << (limb_bits * t_b))]
                out = multiply_batch([a for a, _ in pairs], [b for _, b in pairs], t_a, t_b, cfg, grouped=grouping == "on")
                for (a, b), ph in zip(pairs, out):
                    res.cases += 1
                    res.max_carry = max(res.max_carry, ph.max_carry)
                    if int(ph.product) != a * b or ph.max_carry > limit:
                        res.fail(A=_hex(a), B=_hex(b), t_a=t_a, t_b=t_b, grouping=grouping,
                                 product=_hex(int(ph.product)), max_carry=ph.max_carry)
    return res


def datapath_sweep(n: int, limb_bits: int = 4, groupings: Sequence[str] = ("off", "on")) -> SuiteResult:
    """Every normalized n-bit M and every A, B < M through the simulated datapath."""
    res = SuiteResult(f"datapath exhaustive n={n} w={limb_bits}")
    for m in range(1 << (n - 1), 1 << n):
        ctx = precompute_context(m, n, limb_bits)
        pairs = [(a, b) for a in range(m) for b in range(m)]
        for chunk in _chunks(pairs, 4 * _CHUNK):
            cases = [(ctx, a, b) for a, b in chunk]
            refs = [_reference(ctx, a, b) for a, b in chunk]
            for grouping in groupings:
                _compare_batch(res, cases, small_config(limb_bits, grouping), grouping, refs)
    return res


def random_cases(n: int, trials: int, seed: int) -> list[tuple[int, int, int]]:
    """(M, A, B) triples with a fresh normalized modulus per case."""
    rng = random.Random(f"{seed}:{n}")
    out = []
    for _ in range(trials):
        m = rng.getrandbits(n) | (1 << (n - 1))
        out.append((m, rng.randrange(m), rng.randrange(m)))
    return out


_CHUNK = 256


def _chunks(seq: Sequence, size: int) -> Iterator[Sequence]:
    for i in range(0, len(seq), size):
        yield seq[i : i + size]


def _reference(ctx: BarrettContext, a: int, b: int):
    try:
        return barrett_modmul(ctx, a, b)
    except LamosError as exc:
        return exc


def _simulate_all(cases, cfg: ArchConfig) -> list:
    """Simulated results, or the raised error per case when the batch fails."""
    try:
        return simulate_modmul_batch(cases, cfg)
    except LamosError:
        out = []
        for case in cases:
            try:
                out += simulate_modmul_batch([case], cfg)
            except LamosError as exc:
                out.append(exc)
        return out


def _compare_batch(res: SuiteResult, cases, cfg: ArchConfig, label: str, references=None) -> None:
    limit = carry_bound(cfg.lanes, cfg.limb_bits)
    if references is None:
        references = [_reference(ctx, a, b) for ctx, a, b in cases]
    for (ctx, a, b), ref, sim in zip(cases, references, _simulate_all(cases, cfg)):
        res.cases += 1
        m = int(ctx.modulus)
        case = dict(A=_hex(a), B=_hex(b), M=_hex(m), grouping=label)
        if isinstance(ref, Exception) or isinstance(sim, Exception):
            res.fail(**case, error=str(ref if isinstance(ref, Exception) else sim))
            continue
        carry = sim.trace.max_carry
        res.max_carry = max(res.max_carry, carry)
        if sim.trace.modmul != ref or int(sim.r) != a * b % m or carry > limit:
            res.fail(**case, simulated=sim.trace.modmul.as_dict(), functional=ref.as_dict(), max_carry=carry)


def random_equivalence(
    n: int, trials: int, seed: int = 0, groupings: Sequence[str] = ("off", "on"), base: ArchConfig = ArchConfig()
) -> SuiteResult:
    """Random (M, A, B): every simulated intermediate equals the functional engine's, R equals divmod."""
    res = SuiteResult(f"datapath random n={n}")
    for chunk in _chunks(random_cases(n, trials, seed), _CHUNK):
        cases = [(precompute_context(m, n, base.limb_bits), a, b) for m, a, b in chunk]
        refs = [_reference(ctx, a, b) for ctx, a, b in cases]
        for g in groupings:
            _compare_batch(res, cases, replace(base, grouping=g), g, refs)
    return res
