import pytest
from hypothesis import given, strategies as st

from lamos import bigint as bi
from lamos.bigint import BigUint
from lamos.errors import InvalidParameterError, UnderflowError

widths = st.sampled_from([1, 3, 4, 8, 13, 16, 64])
naturals = st.integers(min_value=0, max_value=1 << 700)


def big(x, w=8):
    return bi.decompose(x, w)


def test_decompose_examples():
    assert bi.decompose(0, 8).limbs == ()
    assert bi.decompose(0x1234, 8).limbs == (0x34, 0x12)


def test_decompose_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        bi.decompose(5, 0)
    with pytest.raises(InvalidParameterError):
        bi.decompose(-1, 8)


def test_round_trip_2048_bit(rng):
    for _ in range(10_000):
        x = rng.getrandbits(2048)
        a = bi.decompose(x, 8)
        assert bi.recompose(a) == x
        assert all(0 <= v < 256 for v in a.limbs)
        assert not a.limbs or a.limbs[-1] != 0


def test_canonical_form_enforced():
    with pytest.raises(InvalidParameterError):
        BigUint((1, 0), 8)
    with pytest.raises(InvalidParameterError):
        BigUint((256,), 8)
    assert BigUint.from_limbs([5, 0, 0]).limbs == (5,)


def test_hex_round_trip():
    assert BigUint.from_hex("0x00ff").limbs == (0xFF,)
    assert BigUint.from_hex("1234").to_hex() == "1234"
    assert bi.decompose(0).to_hex() == "0"
    assert bi.decompose(0xABC, 3).to_hex() == "abc"
    with pytest.raises(InvalidParameterError):
        BigUint.from_hex("xyz")


def test_mul_examples():
    assert not bi.mul_schoolbook(big(0), big(12345))
    assert bi.mul_schoolbook(big(0xFF), big(0xFF)).limbs == (0x01, 0xFE)


def test_mul_against_repeated_addition_exhaustive_small():
    # every a < 2^12 against every b < 2^8, multiples built by repeated addition
    for a in range(1 << 12):
        x = big(a)
        acc = big(0)
        for b in range(1 << 8):
            assert bi.mul_schoolbook(x, big(b)) == acc
            acc = bi.add(acc, x)


def test_mul_against_repeated_addition_full_range_sampled(rng):
    for a in rng.sample(range(1 << 12), 64):
        x = big(a)
        acc = big(0)
        for b in range(1 << 12):
            assert bi.mul_schoolbook(x, big(b)) == acc
            acc = bi.add(acc, x)


def test_div_examples():
    x = big(0xDEADBEEF)
    assert bi.div_floor(x, big(1)) == (x, big(0))
    q, r = bi.div_floor(big(5535), big(251))
    assert (int(q), int(r)) == (22, 13)
    with pytest.raises(ZeroDivisionError):
        bi.div_floor(x, big(0))


def test_div_multiply_back(rng):
    num = bi.shl(big(1), 512)
    for _ in range(1000):
        m = big(rng.getrandbits(256) | (1 << 255))
        q, r = bi.div_floor(num, m)
        assert bi.add(bi.mul_schoolbook(q, m), r) == num
        assert r < m


def test_sub_shr_examples():
    x = big(0x123456)
    assert not bi.sub(x, x)
    assert bi.shr(big(0x1234), 8).limbs == (0x12,)
    with pytest.raises(UnderflowError):
        bi.sub(big(1), big(2))


def test_cmp_exhaustive_small():
    values = [big(v) for v in range(1 << 8)]
    for i, a in enumerate(values):
        for j, b in enumerate(values):
            assert bi.cmp(a, b) == (i > j) - (i < j)


def test_cmp_16_bit_neighbours():
    for v in range(1 << 16):
        a = big(v)
        assert bi.cmp(a, a) == 0
        assert bi.cmp(a, big(v + 1)) == -1
        assert bi.cmp(big(v + 1), a) == 1


def test_mixed_widths_rejected():
    with pytest.raises(InvalidParameterError):
        bi.add(big(1, 8), big(1, 4))


@given(naturals, naturals, widths)
def test_arithmetic_matches_host_integers(x, y, w):
    a, b = bi.decompose(x, w), bi.decompose(y, w)
    assert int(bi.add(a, b)) == x + y
    assert int(bi.mul_schoolbook(a, b)) == x * y
    assert bi.cmp(a, b) == (x > y) - (x < y)
    hi, lo = max(x, y), min(x, y)
    assert int(bi.sub(bi.decompose(hi, w), bi.decompose(lo, w))) == hi - lo
    if y:
        q, r = bi.div_floor(a, b)
        assert (int(q), int(r)) == divmod(x, y)


@given(naturals, st.integers(min_value=0, max_value=900), widths)
def test_shifts_match_host_integers(x, k, w):
    a = bi.decompose(x, w)
    assert int(bi.shr(a, k)) == x >> k
    assert int(bi.shl(a, k)) == x << k
    assert int(bi.low_bits(a, k)) == x & ((1 << k) - 1)
    assert a.bit_length() == x.bit_length()


@given(st.lists(st.integers(min_value=0, max_value=1 << 30), max_size=40), widths)
def test_propagate_columns(cols, w):
    expected = sum(c << (w * i) for i, c in enumerate(cols))
    assert int(bi.propagate_columns(cols, w)) == expected
