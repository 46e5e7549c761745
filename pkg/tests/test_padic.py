import random

import pytest
from hypothesis import given, settings, strategies as st

from padicslopes.padic import (
    PadicNum,
    exp_small,
    log_one_unit,
    one_unit_part,
    one_unit_pow,
    teichmuller,
)
from padicslopes.errors import PrecisionError


def test_valuation_tracking():
    assert PadicNum(5, 4, 5).valuation() == 1
    assert PadicNum(5, 4, 1).valuation() == 0
    assert PadicNum(5, 4, 0).valuation() is None
    assert PadicNum(5, 4, 0).valuation_floor == 4
    assert PadicNum(5, 4, 75).valuation() == 2


def test_reduction_and_coercion():
    x = PadicNum(5, 6, 7)
    assert x.reduce(3).residue == 7
    with pytest.raises(PrecisionError):
        x.reduce(8)
    with pytest.raises(ValueError):
        x._coerce(PadicNum(7, 6, 1))


def test_p2_rejected():
    with pytest.raises(ValueError):
        PadicNum(2, 4, 1)


def teich_oracle(z, p, N):
    # iterate z ↦ z^p until stable: the defining fixed-point computation
    q = p ** N
    w = z % q
    for _ in range(N + 2):
        w = pow(w, p, q)
    return w


def test_teichmuller_examples():
    assert teichmuller(PadicNum(7, 3, 1)).residue == 1
    assert teichmuller(PadicNum(5, 2, 2)).residue == 7
    w = teichmuller(PadicNum(7, 2, 3))
    assert w.residue == teich_oracle(3, 7, 2)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_teichmuller_defining_properties(p):
    N = 9
    q = p ** N
    rng = random.Random(71 + p)
    for _ in range(40):
        z = rng.randrange(1, q)
        while z % p == 0:
            z = rng.randrange(1, q)
        w = teichmuller(PadicNum(p, N, z))
        assert pow(w.residue, p - 1, q) == 1
        assert (w.residue - z) % p == 0
        assert w.residue == teich_oracle(z, p, N)


def test_teichmuller_rejects_non_unit():
    with pytest.raises(ValueError):
        teichmuller(PadicNum(5, 3, 10))


def test_log_exp_roundtrip():
    for p in (3, 5, 7):
        N = 8
        rng = random.Random(p)
        for _ in range(25):
            u = PadicNum(p, N, 1 + p * rng.randrange(p ** (N - 1)))
            assert exp_small(log_one_unit(u)).agrees(u)
            x = PadicNum(p, N, p * rng.randrange(p ** (N - 1)))
            assert log_one_unit(exp_small(x)).agrees(x)


def test_one_unit_pow_examples():
    p, N = 5, 3
    z = PadicNum(p, N, 6)
    assert one_unit_pow(z, 0).residue == 1
    assert one_unit_pow(PadicNum(p, N, 1), 12).residue == 1
    # z=6 is already a one-unit so ω(6)=1 and ⟨6⟩^3 = 6^3
    expect = (z ** 3) / teichmuller(z) ** 3
    assert one_unit_pow(z, 3).agrees(expect)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_one_unit_pow_matches_repeated_multiplication(p):
    # integer exponents 0..50 against the schoolbook power of ⟨z⟩, N ≤ 12
    N = 12
    rng = random.Random(100 + p)
    for _ in range(8):
        z = PadicNum(p, N, rng.randrange(1, p ** N))
        while not z.is_unit():
            z = PadicNum(p, N, rng.randrange(1, p ** N))
        u = one_unit_part(z)
        acc = PadicNum(p, N, 1)
        for s in range(51):
            assert one_unit_pow(z, s).agrees(acc)
            acc = acc * u


@given(st.sampled_from([3, 5, 7]), st.integers(0, 10 ** 8), st.integers(0, 10 ** 8), st.integers(1, 10 ** 6))
@settings(max_examples=60, deadline=None)
def test_one_unit_pow_additive_in_exponent(p, s, t, zseed):
    N = 7
    z = PadicNum(p, N, zseed * p + 1)
    lhs = one_unit_pow(z, s + t)
    rhs = one_unit_pow(z, s) * one_unit_pow(z, t)
    assert lhs.agrees(rhs)


@given(st.sampled_from([3, 5, 7]), st.integers(), st.integers())
@settings(max_examples=80, deadline=None)
def test_precision_interval_rules(p, a, b):
    N = 6
    x4, y4 = PadicNum(p, N + 4, a), PadicNum(p, N + 4, b)
    x, y = PadicNum(p, N, a), PadicNum(p, N, b)
    assert (x + y).agrees((x4 + y4), prec=N)
    assert (x * y).agrees((x4 * y4), prec=min((x * y).prec, N))
    assert (x + y).prec == N
    assert (x * y).prec >= N


def test_shift_and_divexact():
    x = PadicNum(5, 6, 50)
    assert x.shift(-1).residue == 10 and x.shift(-1).prec == 5
    assert x.divexact(10).residue == 5
    with pytest.raises(ValueError):
        PadicNum(5, 6, 3).shift(-1)


def test_unit_inverse():
    x = PadicNum(7, 5, 3)
    assert (x * x.invert()).residue == 1
    with pytest.raises(ZeroDivisionError):
        PadicNum(7, 5, 14).invert()
