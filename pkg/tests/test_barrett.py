import pytest

from lamos import bigint as bi
from lamos.barrett import barrett_modmul, estimate_quotient, estimate_quotient_parts, precompute_context, refine
from lamos.errors import ContractViolation, InvalidModulusError, InvalidParameterError, OutOfRangeError


@pytest.mark.parametrize("m, expected", [(251, 261), (255, 257), (128, 512)])
def test_m_prime_small(m, expected):
    assert int(precompute_context(m, 8).m_prime) == expected


def test_m_prime_range(rng):
    for n in (16, 64, 256, 1024):
        m = rng.getrandbits(n) | (1 << (n - 1))
        mp = int(precompute_context(m, n).m_prime)
        assert mp == (1 << 2 * n) // m
        assert 1 << n <= mp <= 1 << (n + 1)


@pytest.mark.parametrize("m", [0, 127, 1, 0x7F])
def test_unnormalized_modulus(m):
    with pytest.raises(InvalidModulusError, match="modulus must have top bit set"):
        precompute_context(m, 8)


def test_tiny_width_rejected():
    with pytest.raises(InvalidParameterError):
        precompute_context(1, 1)


def test_estimate_quotient_worked_example():
    ctx = precompute_context(251, 8)
    u, e = estimate_quotient_parts(ctx, bi.decompose(5535))
    assert int(u) == 11223 and int(e) == 21
    assert not estimate_quotient(ctx, 0)


def test_modmul_worked_example():
    tr = barrett_modmul(precompute_context(251, 8), 123, 45)
    assert int(tr.c) == 5535
    assert int(tr.e) == 21
    assert int(tr.p) == 21 * 251
    assert int(tr.t) == 264
    assert tr.refine_count == 1
    assert int(tr.r) == 13
    assert tr.as_dict() == {"C": "159f", "u": "2bd7", "E": "15", "P": "1497", "T": "108", "refine_count": 1, "R": "d"}


def test_zero_operand():
    tr = barrett_modmul(precompute_context(251, 8), 0, 200)
    assert not tr.r and tr.refine_count == 0


def test_operand_range():
    ctx = precompute_context(251, 8)
    with pytest.raises(OutOfRangeError):
        barrett_modmul(ctx, 251, 1)
    with pytest.raises(OutOfRangeError):
        barrett_modmul(ctx, 1, 300)


def test_refine_examples():
    assert refine(17, 251) == (bi.decompose(17), 0)
    r, count = refine(2 * 251 + 5, 251)
    assert (int(r), count) == (5, 2)
    with pytest.raises(ContractViolation):
        refine(3 * 251, 251)


def test_refine_other_width():
    r, count = refine(bi.decompose(20, 4), bi.decompose(13, 4))
    assert (int(r), count, r.width) == (7, 1, 4)


@pytest.mark.parametrize("n", [256, 512, 1024, 2048])
def test_random_against_oracle(rng, n):
    # the full 10^4-per-width run lives in the acceptance suite
    for _ in range(200):
        m = rng.getrandbits(n) | (1 << (n - 1))
        ctx = precompute_context(m, n)
        a, b = rng.randrange(m), rng.randrange(m)
        tr = barrett_modmul(ctx, a, b)
        q, r = divmod(a * b, m)
        assert int(tr.r) == r
        assert 0 <= q - int(tr.e) <= 2
        assert int(tr.t) < 3 * m

