import json

import pytest

from lamos import bigint as bi
from lamos.barrett import barrett_modmul, precompute_context
from lamos.datapath import (
    TRACE_SCHEMA,
    extract_shifted,
    multiply,
    multiply_batch,
    simulate_modmul,
    simulate_modmul_batch,
    subtract_and_refine,
)
from lamos.errors import ContractViolation, InvalidParameterError, OutOfRangeError
from lamos.macro import MacroConfig
from lamos.scheduler import ArchConfig, build_schedule, cycles_modmul


def random_case(rng, n):
    m = rng.getrandbits(n) | (1 << (n - 1))
    return precompute_context(m, n), rng.randrange(m), rng.randrange(m)


def test_extract_shifted():
    x = bi.decompose(0xABCDEF)
    assert extract_shifted(x, 0) == x
    assert int(extract_shifted(bi.decompose(11223), 9)) == 21


def test_extract_shifted_matches_shr(rng):
    for _ in range(10_000):
        x = bi.decompose(rng.getrandbits(600))
        k = rng.randrange(700)
        assert extract_shifted(x, k) == bi.shr(x, k)


def test_subtract_and_refine():
    m = bi.decompose(251)
    c = bi.decompose(5535)
    t, r, count = subtract_and_refine(c, c, m)
    assert (int(t), int(r), count) == (0, 0, 0)
    t, r, count = subtract_and_refine(c, bi.decompose(21 * 251), m)
    assert (int(t), int(r), count) == (264, 13, 1)
    with pytest.raises(ContractViolation):
        subtract_and_refine(bi.decompose(5), c, m)


def test_worked_example_through_datapath():
    ctx = precompute_context(251, 8)
    res = simulate_modmul(ctx, 123, 45)
    assert res.trace.modmul == barrett_modmul(ctx, 123, 45)
    assert int(res.trace.c_buffer) == 5535
    assert [int(x) for x in res.trace.input_buffer] == [123, 43, 21]


def test_n256_matches_oracle_and_table_cycles(rng):
    for _ in range(20):
        ctx, a, b = random_case(rng, 256)
        res = simulate_modmul(ctx, a, b)
        assert int(res.r) == a * b % int(ctx.modulus)
        assert res.trace.modmul == barrett_modmul(ctx, a, b)
    assert res.report.total == 104
    assert res.report.latency_ns == 260


def test_zero_operand_keeps_cycle_count():
    ctx = precompute_context((1 << 63) + 12345, 64)
    events = []
    res = simulate_modmul(ctx, 0, 999, hook=events.append)
    assert not res.r
    assert events and all(e.result == 0 for e in events if e.slice >= 0)
    assert res.report == simulate_modmul(ctx, 5, 999).report


def test_grouped_1024_on_four_macros(rng):
    ctx, a, b = random_case(rng, 1024)
    res = simulate_modmul(ctx, a, b, ArchConfig(macro_count=4, grouping="on"))
    assert res.report.mult1 == 160
    assert int(res.r) == a * b % int(ctx.modulus)


@pytest.mark.parametrize("n", [256, 1024])
def test_modes_share_intermediates(rng, n):
    ctx, a, b = random_case(rng, n)
    off = simulate_modmul(ctx, a, b, ArchConfig(grouping="off"))
    on = simulate_modmul(ctx, a, b, ArchConfig(grouping="on"))
    assert off.trace.modmul == on.trace.modmul
    assert off.trace.c_buffer == on.trace.c_buffer and off.trace.u_buffer == on.trace.u_buffer
    if n == 1024:
        assert off.report.total != on.report.total


@pytest.mark.parametrize("n", [8, 64, 264])
@pytest.mark.parametrize("cfg", [ArchConfig(grouping="off"), ArchConfig(grouping="on"), ArchConfig(macro_count=3)])
def test_stepwise_equals_array_path(rng, n, cfg):
    ctx, a, b = random_case(rng, n)
    fast = simulate_modmul(ctx, a, b, cfg)
    slow = simulate_modmul(ctx, a, b, cfg, stepwise=True)
    assert fast.trace.modmul == slow.trace.modmul
    for p, q in zip(fast.trace.phases, slow.trace.phases):
        assert (p.product, p.mac_events, p.max_mac, p.max_carry) == (q.product, q.mac_events, q.max_mac, q.max_carry)


def test_hook_sees_every_scheduled_mac(rng):
    cfg = ArchConfig(grouping="on")
    a, b = rng.getrandbits(512), rng.getrandbits(512)
    events = []
    ph = multiply(a, b, 64, 64, cfg, hook=events.append)
    sched = build_schedule(64, 64, cfg, True)
    assert len(events) == len(sched.assignments) == ph.mac_events
    assert max(e.cycle for e in events) < sched.total_cycles
    assert int(ph.product) == a * b


def test_batch_equals_single(rng):
    cases = [random_case(rng, 512) for _ in range(12)]
    batch = simulate_modmul_batch(cases)
    for (ctx, a, b), res in zip(cases, batch):
        assert res.trace == simulate_modmul(ctx, a, b).trace


def test_products_multi_slice(rng):
    cfg = ArchConfig()
    for t_a, t_b in [(1, 100), (100, 1), (40, 70), (257, 258)]:
        xs = [rng.getrandbits(8 * t_a) for _ in range(5)]
        ys = [rng.getrandbits(8 * t_b) for _ in range(5)]
        for g in (False, True):
            for x, y, ph in zip(xs, ys, multiply_batch(xs, ys, t_a, t_b, cfg, grouped=g)):
                assert int(ph.product) == x * y
                assert ph.max_carry <= 8160


def test_carry_bound_at_worst_case():
    # all-ones operands maximize every column sum
    n = 2048
    m = (1 << n) - 1
    ctx = precompute_context(m, n)
    res = simulate_modmul(ctx, m - 1, m - 1)
    assert 0 < res.trace.max_carry <= 8160
    assert max(p.max_mac for p in res.trace.phases) < 1 << 21


def test_small_limb_width():
    cfg = ArchConfig(macro=MacroConfig(limb_bits=4))
    ctx = precompute_context(0xB5, 8, 4)
    for a in range(0, 0xB5, 13):
        res = simulate_modmul(ctx, a, 0x77, cfg)
        assert int(res.r) == a * 0x77 % 0xB5


def test_rejects_bad_inputs():
    ctx = precompute_context(251, 8)
    with pytest.raises(OutOfRangeError):
        simulate_modmul(ctx, 251, 3)
    with pytest.raises(InvalidParameterError):
        simulate_modmul(ctx, 1, 3, ArchConfig(macro=MacroConfig(limb_bits=4)))
    with pytest.raises(InvalidParameterError):
        simulate_modmul(precompute_context(1000, 10), 1, 3)


@pytest.mark.parametrize("timing", ["paper", "strict"])
def test_cycle_report(timing):
    cfg = ArchConfig(timing_mode=timing)
    rep = simulate_modmul(precompute_context((1 << 255) + 1, 256), 3, 4, cfg).report
    assert rep.total == rep.mult1 + rep.mult2 + rep.mult3 + rep.overhead
    assert rep.total == cycles_modmul(256, cfg).total
    assert rep.timing_mode == timing


def test_trace_json(rng):
    ctx, a, b = random_case(rng, 256)
    res = simulate_modmul(ctx, a, b)
    doc = json.loads(json.dumps(res.to_json_dict(ctx, bi.decompose(a), bi.decompose(b))))
    assert doc["schema"] == TRACE_SCHEMA
    assert int(doc["intermediates"]["R"], 16) == a * b % int(ctx.modulus)
    assert int(doc["buffers"]["C"], 16) == a * b
    assert [p["name"] for p in doc["phases"]] == ["mult1", "mult2", "mult3"]
    assert doc["cycles"]["total"] == 104
