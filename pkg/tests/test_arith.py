import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from gfermat.arith import (Instance, check_point, factorize, genus_info, is_prime, kronecker,
                           primes_up_to, squarefree_split, valuation)


def test_factorize_examples():
    assert factorize(1).sign == 1 and factorize(1).factors == ()
    f = factorize(-332)
    assert f.sign == -1 and f.factors == ((2, 2), (83, 1))
    assert factorize(6723).factors == ((3, 4), (83, 1))


def test_factorize_zero_rejected():
    with pytest.raises(ValueError):
        factorize(0)


def test_factorize_reassembles_random_64bit():
    rng = random.Random(1)
    for _ in range(2000):
        m = rng.randrange(1, 1 << 64) * rng.choice((1, -1))
        f = factorize(m)
        assert f.value() == m
        ps = f.primes()
        assert ps == sorted(ps) and len(set(ps)) == len(ps)
        assert all(is_prime(p) for p in ps)


def test_factorize_semiprime_with_large_factors():
    p, q = 1000000007, 998244353
    assert factorize(p * q).factors == ((q, 1), (p, 1))


@given(st.integers(-10**12, 10**12).filter(bool))
def test_squarefree_split_property(B):
    s = squarefree_split(B)
    assert s.f * s.f * s.B0 == B
    assert all(e == 1 for _, e in factorize(s.B0).factors)


def test_squarefree_split_examples():
    assert (squarefree_split(12).f, squarefree_split(12).B0) == (2, 3)
    assert (squarefree_split(6723).f, squarefree_split(6723).B0) == (9, 83)
    assert (squarefree_split(-83).f, squarefree_split(-83).B0) == (1, -83)
    with pytest.raises(ValueError):
        squarefree_split(0)


def test_kronecker_examples():
    assert kronecker(-29, 3) == 1
    assert kronecker(-1, 2) == 1
    assert kronecker(-83, 2) == -1


def test_kronecker_matches_residue_enumeration():
    for p in primes_up_to(97)[1:]:
        squares = {x * x % p for x in range(1, p)}
        for a in range(-2 * p, 2 * p):
            want = 0 if a % p == 0 else (1 if a % p in squares else -1)
            assert kronecker(a, p) == want


@given(st.integers(-500, 500), st.integers(-500, 500), st.integers(1, 500))
def test_kronecker_multiplicative_in_top(a, b, m):
    assert kronecker(a * b, m) == kronecker(a, m) * kronecker(b, m)


@given(st.integers(-500, 500), st.integers(1, 300), st.integers(1, 300))
def test_kronecker_multiplicative_in_bottom(a, m, k):
    assert kronecker(a, m * k) == kronecker(a, m) * kronecker(a, k)


def test_genus():
    assert genus_info(3) == Fraction(2, 3)
    assert genus_info(5) == Fraction(4, 5)
    assert genus_info(9) == Fraction(8, 9)
    with pytest.raises(ValueError):
        genus_info(4)


def test_instance_validation():
    Instance(1, 2, 3)
    for bad in ((0, 1, 3), (1, 0, 3), (1, 1, 4), (1, 1, 1)):
        with pytest.raises(ValueError):
            Instance(*bad)


def test_check_point():
    assert check_point(29, 19, 3, 7, 4, 3)
    assert not check_point(29, 19, 3, 7, 4, 4)
    assert not check_point(1, 2, 3, 0, 0, 0)
    assert not check_point(1, 1, 3, 2, 2, 2)  # a solution, but not primitive


@given(st.integers(1, 10**6), st.sampled_from([2, 3, 5, 7, 11]))
def test_valuation(m, p):
    v = valuation(m, p)
    assert m % p**v == 0 and (m // p**v) % p
