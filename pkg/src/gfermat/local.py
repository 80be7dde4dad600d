"""p-adic solubility of x^2 + B y^2 = C z^n by a closed-form test, and local densities."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .arith import Instance, factorize, kronecker, split_valuation


@dataclass(frozen=True)
class LocalVerdict:
    p: int
    k: int
    ell: int
    solvable: bool
    case_label: str


def _decide(p: int, k: int, ell: int, Bu: int, n: int) -> tuple[bool, str]:
    # Bu is the p-free part of B; returns (solvable, clause examined)
    if ell % 2 == 0:
        return True, "even-ell"
    if k >= n + ell:
        return True, "k-large"
    if k % 2:
        return not (ell < k), "i"
    if p != 2:
        return kronecker(-Bu, p) != -1, "ii"
    r = Bu % 8
    if k < ell:
        return r != 3, "iii"
    if k < n + ell - 2:
        return r not in (1, 3, 5), "iv"
    # k even, ell odd and k < n + ell force k = n + ell - 2 here
    return r not in (1, 5), "v"


def local_solvable_at(inst: Instance, p: int) -> LocalVerdict:
    """Whether the curve has a primitive Z_p-point."""
    k, Bu = split_valuation(inst.B, p)
    ell, _ = split_valuation(inst.C, p)
    ok, label = _decide(p, k, ell, Bu, inst.n)
    return LocalVerdict(p, k, ell, ok, label)


def relevant_primes(inst: Instance) -> list[int]:
    """Primes that can obstruct: 2, and primes dividing C to odd order.

    A prime with even v_p(C) never obstructs, and a prime with p not dividing 2C
    has v_p(C) = 0, so the primes dividing B only matter through this list."""
    ps = {2}
    for p, e in factorize(inst.C).factors:
        if e % 2:
            ps.add(p)
    return sorted(ps)


def everywhere_locally_solvable(inst: Instance) -> tuple[bool, LocalVerdict | None]:
    for p in relevant_primes(inst):
        v = local_solvable_at(inst, p)
        if not v.solvable:
            return False, v
    return True, None


# ---------------------------------------------------------------- densities

def _cell_fraction(p: int, n: int, k: int, ell: int) -> Fraction:
    """Fraction of unit parts B' for which (v(B), v(C)) = (k, ell) is soluble.

    Units are sampled by their classes mod p (odd p) or mod 8 (p = 2); the
    criterion only looks at those classes."""
    good = 0
    for b in _unit_reps(p):
        inst = Instance(p**k * b, p**ell, n)
        good += local_solvable_at(inst, p).solvable
    return Fraction(good, len(_unit_reps(p)))


def _unit_reps(p: int) -> tuple[int, ...]:
    # equal-mass unit classes the criterion can tell apart: B' mod 8 at p = 2,
    # and whether -B' is a square mod p otherwise (half the units each)
    if p == 2:
        return (1, 3, 5, 7)
    g = next(a for a in range(2, p) if kronecker(a, p) == -1)
    return (p - 1, p - g)


def _cell_mass(p: int, k: int, ell: int) -> Fraction:
    return Fraction(p - 1, p) ** 2 / Fraction(p) ** (k + ell)


def density_by_summation(p: int, n: int, depth: int | None = None) -> Fraction:
    """Haar measure of soluble (B, C) in Z_p^2 by summing over valuation cells.

    Shifting (k, ell) by (2, 2) keeps the verdict and scales the mass by p^-4,
    so the sum folds onto cells with min(k, ell) <= 1. Along those, every cell
    with k >= n + ell is soluble and for ell beyond n + 2 the pattern in ell is
    periodic of period 2, which is summed as a geometric series."""
    L = n + 4 if depth is None else depth
    fold = 1 / (1 - Fraction(1, p**4))
    total = Fraction(0)
    # min(k, ell) <= 1 cells, explicit part
    for ell in range(L + 1):
        for k in range(0, n + ell + 1):
            if min(k, ell) > 1:
                continue
            total += _cell_mass(p, k, ell) * _cell_fraction(p, n, k, ell)
        # tail in k: all cells k > n + ell with min(k, ell) <= 1 are soluble
        if ell <= 1:
            total += Fraction(p - 1, p) ** 2 / Fraction(p) ** ell * Fraction(1, p ** (n + ell + 1)) / (1 - Fraction(1, p))
    # tail in ell > L with k in {0, 1}: verdict depends only on parity of ell
    for k in (0, 1):
        for parity in (0, 1):
            ell0 = L + 1 if (L + 1) % 2 == parity else L + 2
            frac = _cell_fraction(p, n, k, ell0)
            if frac:
                total += _cell_mass(p, k, ell0) * frac / (1 - Fraction(1, p * p))
    return total * fold


def density_truncated(p: int, n: int, m: int) -> Fraction:
    """Mass of soluble cells with v(B), v(C) <= m; within 2 p^-(m+1) of the density."""
    return sum((_cell_mass(p, k, ell) * _cell_fraction(p, n, k, ell)
                for k in range(m + 1) for ell in range(m + 1)), Fraction(0))


def local_density_closed_form(p: int, n: int) -> Fraction:
    """The published closed form for the odd-p density.

    It disagrees with the summation (and with brute-force measure) for every
    tested (p, n); for example (3, 3) gives 289/320 against 2597/2880. Kept so
    the two routes can be compared."""
    num = p**n + p ** (n - 2) + 2 * p ** (n - 3) - p + 2
    den = 2 * p ** (n - 3) * (p + 1) * (p**3 + p**2 + p + 1)
    return 1 - Fraction(num, den)


def local_density_factor(p: int, n: int) -> Fraction:
    """Haar density of locally soluble (B, C) at an odd prime, by summation."""
    if p == 2:
        raise ValueError("use density_factor_2 for p = 2")
    if p < 2:
        raise ValueError("p must be prime")
    return density_by_summation(p, n)


def density_routes_agree(p: int, n: int) -> bool:
    return density_by_summation(p, n) == local_density_closed_form(p, n)


def density_factor_2(n: int) -> Fraction:
    return density_by_summation(2, n)


# ------------------------------------------------------ vectorized counting

class LocalTable:
    """Per-prime valuation and residue data over a fixed range of B values.

    Used by sweeps to evaluate the criterion for one C against many B at once."""

    def __init__(self, Bs, n: int):
        import numpy as np

        self.np = np
        self.Bs = np.asarray(Bs, dtype=np.int64)
        self.n = n
        self._cache: dict[int, tuple] = {}

    def _data(self, p: int):
        d = self._cache.get(p)
        if d is None:
            np = self.np
            v = np.zeros(self.Bs.shape, dtype=np.int64)
            u = self.Bs.copy()
            while True:
                m = (u % p == 0)
                if not m.any():
                    break
                v[m] += 1
                u[m] //= p
            if p == 2:
                res = u % 8
            else:
                qr = np.full(p, -1, dtype=np.int64)
                qr[(np.arange(1, p) ** 2) % p] = 1
                res = qr[(-u) % p]
            d = (v, res)
            self._cache[p] = d
        return d

    def mask(self, C: int):
        """Boolean array: is (B, C) soluble at every prime, for each B."""
        np = self.np
        ok = np.ones(self.Bs.shape, dtype=bool)
        for p, ell in factorize(C).factors:
            if ell % 2 == 0:
                continue
            ok &= self._prime_mask(p, ell)
        return ok

    def _prime_mask(self, p: int, ell: int):
        np = self.np
        n = self.n
        k, res = self._data(p)
        if ell % 2 == 0:
            return np.ones(k.shape, dtype=bool)
        odd = (k % 2 == 1)
        bad = odd & (k > ell) & (k < n + ell)
        even = ~odd
        if p != 2:
            bad |= even & (k < n + ell) & (res == -1)
        else:
            bad |= even & (k < ell) & (res == 3)
            bad |= even & (k > ell) & (k < n + ell - 2) & ((res == 1) | (res == 3) | (res == 5))
            bad |= even & (k == n + ell - 2) & ((res == 1) | (res == 5))
        return ~bad
