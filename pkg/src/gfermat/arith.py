"""Exact integer helpers: factoring, valuations, squarefree parts, Kronecker symbols."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

TRIAL_BOUND = 1 << 10

_SMALL_PRIMES: list[int] = []


def _small_primes() -> list[int]:
    if not _SMALL_PRIMES:
        sieve = bytearray([1]) * TRIAL_BOUND
        sieve[0:2] = b"\x00\x00"
        for i in range(2, math.isqrt(TRIAL_BOUND) + 1):
            if sieve[i]:
                sieve[i * i::i] = bytearray(len(range(i * i, TRIAL_BOUND, i)))
        _SMALL_PRIMES.extend(i for i in range(TRIAL_BOUND) if sieve[i])
    return _SMALL_PRIMES


def primes_up_to(n: int) -> list[int]:
    """All primes p <= n (simple sieve)."""
    if n < 2:
        return []
    import numpy as np

    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return [int(p) for p in np.flatnonzero(sieve)]


# Deterministic Miller-Rabin witnesses; correct for n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _small_primes()[:60]:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_BASES if n < _MR_LIMIT else _MR_BASES + tuple(_small_primes()[13:60])
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent(n: int, rng: random.Random) -> int:
    # Pollard rho, Brent's cycle variant; returns a nontrivial factor of composite n
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        x = ys = y
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


@dataclass(frozen=True)
class FactoredInt:
    sign: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> int:
        v = self.sign
        for p, e in self.factors:
            v *= p**e
        return v

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)


_FACTOR_CACHE: dict[int, tuple[tuple[int, int], ...]] = {}


def factorize(m: int) -> FactoredInt:
    """Prime factorization of a nonzero integer."""
    if m == 0:
        raise ValueError("cannot factor zero")
    sign = -1 if m < 0 else 1
    m = abs(m)
    cached = _FACTOR_CACHE.get(m)
    if cached is not None:
        return FactoredInt(sign, cached)
    counts: dict[int, int] = {}
    rest = m
    for p in _small_primes():
        if p * p > rest:
            break
        while rest % p == 0:
            rest //= p
            counts[p] = counts.get(p, 0) + 1
    if rest > 1:
        rng = random.Random(rest)
        stack = [rest]
        while stack:
            q = stack.pop()
            if q == 1:
                continue
            if q < TRIAL_BOUND * TRIAL_BOUND or is_prime(q):
                counts[q] = counts.get(q, 0) + 1
                continue
            r = math.isqrt(q)
            if r * r == q:
                stack += [r, r]
                continue
            d = _brent(q, rng)
            stack += [d, q // d]
    out = tuple(sorted(counts.items()))
    if len(_FACTOR_CACHE) < 1 << 16:
        _FACTOR_CACHE[m] = out
    return FactoredInt(sign, out)


def valuation(m: int, p: int) -> int:
    """v_p(m); zero is rejected since its valuation is infinite."""
    if m == 0:
        raise ValueError("valuation of zero")
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def split_valuation(m: int, p: int) -> tuple[int, int]:
    """Return (v_p(m), m / p^v)."""
    if m == 0:
        raise ValueError("valuation of zero")
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v, m


@dataclass(frozen=True)
class SquarefreeSplit:
    f: int
    B0: int


def squarefree_split(B: int) -> SquarefreeSplit:
    """Write B = f^2 * B0 with B0 squarefree and f > 0."""
    if B == 0:
        raise ValueError("B must be nonzero")
    fac = factorize(B)
    f, B0 = 1, fac.sign
    for p, e in fac.factors:
        f *= p ** (e // 2)
        if e % 2:
            B0 *= p
    return SquarefreeSplit(f, B0)


def is_squarefree(m: int) -> bool:
    return all(e == 1 for _, e in factorize(m).factors)


def is_square(m: int) -> bool:
    return m >= 0 and math.isqrt(m) ** 2 == m


def kronecker(a: int, m: int) -> int:
    """Kronecker symbol (a/m)."""
    if m == 0:
        raise ValueError("kronecker symbol needs m != 0")
    result = 1
    if m < 0:
        m = -m
        if a < 0:
            result = -result
    v = 0
    while m % 2 == 0:
        m //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/m) for odd positive m
    a %= m
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    return result if m == 1 else 0


def sqrt_mod_prime(a: int, p: int) -> int:
    """Some r with r^2 = a mod p (p prime, a a square mod p); Tonelli-Shanks."""
    a %= p
    if p == 2 or a == 0:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        raise ValueError(f"{a} is not a square mod {p}")
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


def genus_info(n: int) -> Fraction:
    """Genus (n-1)/n of the stacky curve attached to exponent n."""
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3")
    return Fraction(n - 1, n)


@dataclass(frozen=True)
class Instance:
    B: int
    C: int
    n: int

    def __post_init__(self):
        if self.B == 0 or self.C == 0:
            raise ValueError("B and C must be nonzero")
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError("n must be odd and >= 3")


def check_point(B: int, C: int, n: int, x: int, y: int, z: int) -> bool:
    """Primitive solution of x^2 + B y^2 = C z^n."""
    return x * x + B * y * y == C * z**n and math.gcd(math.gcd(x, y), z) == 1
