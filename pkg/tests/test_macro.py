import pytest

from lamos.bigint import decompose
from lamos.errors import ContractViolation, InvalidParameterError
from lamos.macro import MacroConfig, gen_input_stream, lane_digest, mac_cycle, store_operand

CFG = MacroConfig()


def test_default_geometry():
    assert CFG.lanes == 32
    assert CFG.mac_out_bits == 21
    assert MacroConfig(limb_bits=4).lanes == 64
    with pytest.raises(InvalidParameterError):
        MacroConfig(cols=250)


@pytest.mark.parametrize("t_b, slices", [(32, 1), (128, 4), (33, 2), (1, 1)])
def test_store_slices(t_b, slices):
    state = store_operand(CFG, [1] * t_b)
    assert state.n_slices == slices
    assert all(len(row) == 32 for row in state.stored)


def test_store_pads_last_slice():
    state = store_operand(CFG, decompose(7), 1)
    assert state.stored == ((7,) + (0,) * 31,)


def test_store_rejects_wide_limb():
    with pytest.raises(InvalidParameterError):
        store_operand(CFG, [256])


def test_mac_examples():
    state = store_operand(CFG, [255] * 32)
    assert mac_cycle(state, 0, [0] * 32) == 0
    top = mac_cycle(state, 0, [255] * 32)
    assert top == 32 * 65025 == 2_080_800
    assert top < 1 << CFG.mac_out_bits
    state = store_operand(CFG, list(range(1, 33)))
    for j in range(32):
        hot = [0] * 32
        hot[j] = 3
        assert mac_cycle(state, 0, hot) == 3 * (j + 1)


def test_mac_rejects_bad_input():
    state = store_operand(CFG, [1] * 32)
    with pytest.raises(ContractViolation):
        mac_cycle(state, 0, [256] + [0] * 31)
    with pytest.raises(InvalidParameterError):
        mac_cycle(state, 0, [0] * 31)
    with pytest.raises(InvalidParameterError):
        mac_cycle(state, 1, [0] * 32)


def test_mac_hook_reports_event():
    events = []
    state = store_operand(CFG, [2] * 32)
    mac_cycle(state, 0, [1] * 32, hook=events.append, cycle=5, macro=1)
    (ev,) = events
    assert (ev.cycle, ev.macro, ev.slice, ev.result) == (5, 1, 0, 64)
    assert ev.digest == lane_digest([1] * 32)


def test_stream_two_by_two():
    a0, a1 = 11, 22
    stream = gen_input_stream([a0, a1], 2, CFG)
    rows = [r[0][:3] for r in stream]
    assert rows == [(a0, 0, 0), (a1, a0, 0), (0, a1, 0)]


@pytest.mark.parametrize("t, rows, slices", [(32, 63, 1), (128, 255, 4)])
def test_stream_shape(t, rows, slices):
    stream = gen_input_stream([1] * t, t, CFG)
    assert stream.n_rows == rows
    assert stream.n_slices == slices
    assert stream.grid().shape == (rows, slices * 32)


@pytest.mark.parametrize("t_a, t_b", [(1, 1), (5, 40), (40, 5), (33, 64), (70, 70)])
def test_stream_band_and_pair_coverage(t_a, t_b):
    a = list(range(1, t_a + 1))
    stream = gen_input_stream(a, t_b, CFG)
    grid = stream.grid()
    seen = []
    for r in range(stream.n_rows):
        for s in range(stream.n_slices):
            vec = stream.lane_vector(r, s)
            assert tuple(grid[r, 32 * s : 32 * (s + 1)]) == vec
            for j, v in enumerate(vec):
                lane = 32 * s + j
                if v:
                    assert 0 <= r - lane <= t_a - 1 and lane < t_b
                    seen.append((v - 1, lane))
    # limb i of A meets limb j of B exactly once
    assert sorted(seen) == [(i, j) for i in range(t_a) for j in range(t_b)]
