"""``lamos`` command line: verification, cycle reports, sweeps and comparisons.

Exit codes: 0 success, 1 verification or claim failure, 2 usage error.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import random
import sys
from typing import Callable, Optional, Sequence

import click

from . import verify as vf
from .barrett import precompute_context
from .datapath import simulate_modmul
from .errors import InvalidModulusError, LamosError
from .experiments import (
    Settings,
    ablation_rows,
    compare_rows,
    load_settings,
    monotonicity_violations,
    scaling_claims,
    sweep_rows,
)
from .scheduler import GROUPING_MODES, TIMING_MODES

FORMATS = ("text", "csv", "json")


def _int_list(ctx, param, value) -> Optional[tuple[int, ...]]:
    if not value:
        return None
    out = []
    for item in value:
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            try:
                out.append(int(part))
            except ValueError:
                raise click.BadParameter(f"{part!r} is not an integer") from None
    if not out:
        raise click.BadParameter("needs at least one value")
    return tuple(out)


def _emit(rows: Sequence[dict], fmt: str, text: Optional[Callable[[], str]] = None) -> None:
    if fmt == "json":
        click.echo(json.dumps(list(rows), indent=2))
    elif fmt == "csv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        click.echo(buf.getvalue(), nl=False)
    else:
        click.echo(text() if text else _table(rows))


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}" if abs(v) < 1e6 else f"{v:.4e}"
    return "-" if v is None else str(v)


def _table(rows: Sequence[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    cells = [keys] + [[_fmt(r[k]) for k in keys] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(keys))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)


def _settings(ctx: click.Context, macros=None, grouping=None, timing=None) -> Settings:
    try:
        return ctx.obj["settings"].with_arch(macro_count=macros, grouping=grouping, timing_mode=timing)
    except LamosError as exc:
        raise click.UsageError(str(exc)) from None


def _usage(fn):
    """Turn library parameter errors into usage errors (exit 2)."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValueError as exc:
            # parameter errors only; contract violations are bugs and propagate
            raise click.UsageError(str(exc)) from None

    return wrapper


format_option = click.option("--format", "fmt", type=click.Choice(FORMATS), default="text", show_default=True)
macros_option = click.option("--macros", type=click.IntRange(min=1), default=None, help="Macro count (default from config).")
grouping_option = click.option("--grouping", type=click.Choice(GROUPING_MODES), default=None, help="Tile grouping mode.")
timing_option = click.option("--timing", type=click.Choice(TIMING_MODES), default=None, help="Cycle accounting mode.")


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON config file (default: $LAMOS_CONFIG).")
@click.pass_context
def main(ctx: click.Context, config_path: Optional[str]) -> None:
    """Barrett modular multiplication on a simulated SRAM compute-in-memory accelerator."""
    try:
        ctx.obj = {"settings": load_settings(config_path)}
    except LamosError as exc:
        raise click.UsageError(str(exc)) from None


@main.command()
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trials", type=click.IntRange(min=0), default=100, show_default=True,
              help="Random cases per bit width and grouping mode.")
@click.option("--bits", multiple=True, callback=_int_list, help="Bit widths for random cases (comma list).")
@click.option("--exhaustive-bits", type=click.IntRange(min=2, max=12), default=8, show_default=True,
              help="Bit width of the exhaustive functional sweep.")
@format_option
@click.pass_context
@_usage
def verify(ctx, seed, trials, bits, exhaustive_bits, fmt) -> None:
    """Run the oracle suites; exit 1 on any mismatch."""
    base = ctx.obj["settings"].arch
    bits = bits or (256, 512, 1024, 2048)
    for n in bits:
        if n % base.limb_bits:
            raise click.UsageError(f"bit width {n} is not a multiple of the limb width {base.limb_bits}")
    suites = [vf.functional_sweep(exhaustive_bits), vf.product_sweep(), vf.datapath_sweep(4)]
    suites += [vf.random_equivalence(n, trials, seed, base=base) for n in bits]
    failed = sum(s.failures for s in suites)
    if fmt == "text":
        for s in suites:
            click.echo(s.summary())
            for ex in s.examples:
                click.echo(f"  counterexample: {json.dumps(ex)}")
        click.echo(f"total: {sum(s.cases for s in suites)} cases, {failed} failures")
    else:
        _emit([s.as_dict() for s in suites] if fmt == "json" else
              [{k: v for k, v in s.as_dict().items() if k != "examples"} for s in suites], fmt)
    ctx.exit(1 if failed else 0)


@main.command()
@click.option("--bits", type=click.IntRange(min=2), default=256, show_default=True)
@macros_option
@grouping_option
@timing_option
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for the simulated sample case.")
@format_option
@click.pass_context
@_usage
def simulate(ctx, bits, macros, grouping, timing, seed, fmt) -> None:
    """Cycle report for one modular multiplication, checked on a random case."""
    settings = _settings(ctx, macros, grouping, timing)
    arch = settings.arch
    if bits % arch.limb_bits:
        raise click.UsageError(f"--bits must be a multiple of {arch.limb_bits}, got {bits}")
    rng = random.Random(seed)
    m = rng.getrandbits(bits) | (1 << (bits - 1))
    a, b = rng.randrange(m), rng.randrange(m)
    res = simulate_modmul(precompute_context(m, bits, arch.limb_bits), a, b, arch)
    ok = int(res.r) == a * b % m
    row = {"n": bits, "m": arch.macro_count, **res.report.as_dict(), "sample_ok": ok}
    row.pop("config")
    row["grouped"] = "".join("g" if g else "-" for g in res.report.grouped)

    def text() -> str:
        rep = res.report
        return "\n".join([
            f"n={bits} m={arch.macro_count} grouping={arch.grouping} timing={rep.timing_mode}",
            f"mult cycles: {rep.mult1} + {rep.mult2} + {rep.mult3} (grouped: {row['grouped']})",
            f"overhead: {rep.overhead}",
            f"total: {rep.total} cycles, {rep.latency_ns:g} ns at {arch.clock_mhz:g} MHz",
            f"sample case: {'ok' if ok else 'MISMATCH'}",
        ])

    if fmt == "json":
        row["config"] = res.report.config
        click.echo(json.dumps(row, indent=2))
    else:
        _emit([row], fmt, text)
    ctx.exit(0 if ok else 1)


def _parse_hex(label: str, text: str) -> int:
    s = text.strip().lower()
    if s.startswith("0x"):
        s = s[2:]
    try:
        return int(s, 16)
    except ValueError:
        raise click.BadParameter(f"{text!r} is not hexadecimal", param_hint=label) from None


@main.command()
@click.argument("a_hex", metavar="A")
@click.argument("b_hex", metavar="B")
@click.argument("m_hex", metavar="M")
@click.option("--bits", type=click.IntRange(min=2), default=None, help="Modulus bit width (default: bit length of M rounded up to whole limbs).")
@macros_option
@grouping_option
@click.option("--trace", is_flag=True, help="Print the full simulation trace as JSON.")
@click.pass_context
@_usage
def modmul(ctx, a_hex, b_hex, m_hex, bits, macros, grouping, trace) -> None:
    """Compute A*B mod M (hex operands) on the simulated datapath."""
    arch = _settings(ctx, macros, grouping).arch
    a, b, m = _parse_hex("A", a_hex), _parse_hex("B", b_hex), _parse_hex("M", m_hex)
    w = arch.limb_bits
    n = bits if bits is not None else max(-(-m.bit_length() // w) * w, w)
    try:
        bctx = precompute_context(m, n, arch.limb_bits)
    except InvalidModulusError as exc:
        raise click.UsageError(str(exc)) from None
    res = simulate_modmul(bctx, a, b, arch)
    if trace:
        click.echo(json.dumps(res.to_json_dict(bctx, res.trace.input_buffer[0], res.trace.phases[0].resident), indent=2))
    else:
        click.echo(f"0x{int(res.r):0{-(-n // 4)}x}")


@main.command()
@click.option("--bits", multiple=True, callback=_int_list, help="Bit widths (default 256,512,1024).")
@timing_option
@format_option
@click.pass_context
@_usage
def ablation(ctx, bits, timing, fmt) -> None:
    """Speedup of two macros over one, and of tile grouping over naive mapping."""
    settings = _settings(ctx, timing=timing)
    rows = ablation_rows(bits or (256, 512, 1024), settings)
    _emit([r.as_dict() for r in rows], fmt)


@main.command()
@click.option("--bits", multiple=True, callback=_int_list, help="Bit widths (default 256,2048).")
@macros_option
@grouping_option
@timing_option
@format_option
@click.pass_context
@_usage
def compare(ctx, bits, macros, grouping, timing, fmt) -> None:
    """Latency x area against the baseline designs; checks the 2048-bit scaling endpoints."""
    settings = _settings(ctx, macros, grouping, timing)
    rows = compare_rows(bits or (256, 2048), settings)
    claims = scaling_claims(rows)
    data = [r.as_dict() for r in rows]
    if fmt == "json":
        click.echo(json.dumps({"rows": data, "claims": [
            {"claim": c.name, "value": c.value, "bound": c.bound, "below": c.below, "ok": c.ok} for c in claims
        ]}, indent=2))
    else:
        _emit(data, fmt)
        if fmt == "text":
            for c in claims:
                click.echo(c.describe())
    ctx.exit(0 if all(c.ok for c in claims) else 1)


@main.command()
@click.option("--bits", multiple=True, callback=_int_list, help="Bit widths (default 256,512,1024,2048).")
@click.option("--macros", multiple=True, callback=_int_list, help="Macro counts (default 1,2,4,8).")
@grouping_option
@timing_option
@format_option
@click.pass_context
@_usage
def sweep(ctx, bits, macros, grouping, timing, fmt) -> None:
    """Cycles and latency over a grid of bit widths and macro counts."""
    settings = _settings(ctx, grouping=grouping, timing=timing)
    rows = sweep_rows(bits or (256, 512, 1024, 2048), macros or (1, 2, 4, 8), settings)
    _emit([r.as_dict() for r in rows], fmt)
    bad = monotonicity_violations(rows)
    if fmt == "text":
        click.echo("monotone in m: " + ("yes" if not bad else f"NO ({len(bad)} violations)"))
    elif bad:
        click.echo(f"monotonicity violated at {[(x.n, x.m, y.m) for x, y in bad]}", err=True)
    ctx.exit(1 if bad else 0)


if __name__ == "__main__":
    sys.exit(main())
