"""Counting experiments: local and global sweeps over boxes of (B, C), the
Euler-product constants kappa1 and kappa2 with rigorous enclosures, and
products of local densities."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .arith import Instance, primes_up_to
from .cascade import Status, decide
from .local import LocalTable, density_factor_2, local_density_factor
from .oracle import SearchBound
from .qforms import ResourceError

LOCAL_CAP = 10**5
GLOBAL_CAP = 10**4
SWEEP_BOUND = SearchBound(z_max=40, y_max=2000)

# 80 digits of pi, enough for directed rounding at 2^-256
_PI_DIGITS = "31415926535897932384626433832795028841971693993751058209749445923078164062862089"
_PI_LO = Fraction(int(_PI_DIGITS), 10 ** (len(_PI_DIGITS) - 1))
_PI_HI = _PI_LO + Fraction(1, 10 ** (len(_PI_DIGITS) - 1))


@dataclass
class SweepResult:
    n: int
    T: int
    mode: str
    total_pairs: int
    locally_soluble: int
    decided_solvable: int
    decided_unsolvable: int
    undecided: int
    elapsed: float

    def partition_ok(self) -> bool:
        return self.decided_solvable + self.decided_unsolvable + self.undecided == self.locally_soluble

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _axis(T: int) -> list[int]:
    return [v for v in range(-T + 1, T) if v]


def _local_rows(n: int, T: int):
    Bs = _axis(T)
    table = LocalTable(Bs, n)
    for C in _axis(T):
        yield C, table.mask(C)


def _global_row(args):
    B, n, T, bound = args
    table = LocalTable([B], n)
    out = []
    for C in _axis(T):
        loc = bool(table.mask(C)[0])
        if not loc:
            out.append((B, C, False, None, None))
            continue
        v = decide(B, C, n, bound, want_witness=True)
        out.append((B, C, True, v.status.value, v.witness))
    return out


def sweep(n: int, T: int, mode: str = "local", bound: SearchBound | None = None,
          out: str | None = None, threads: int = 1, cap: int | None = None) -> SweepResult:
    """Count pairs with 0 < |B|, |C| < T.

    Local mode counts everywhere-locally soluble pairs; since nothing is
    decided globally there, every soluble pair counts as undecided. Global
    mode runs the full decision on each locally soluble pair."""
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3")
    if mode not in ("local", "global"):
        raise ValueError("mode must be 'local' or 'global'")
    limit = cap if cap is not None else (LOCAL_CAP if mode == "local" else GLOBAL_CAP)
    if T > limit:
        raise ResourceError(f"T = {T} exceeds the {mode} sweep cap {limit}")
    if T < 2:
        raise ValueError("T must be at least 2")
    t0 = time.perf_counter()
    total = (2 * T - 2) ** 2
    fh = open(out, "w", newline="", encoding="utf-8") if out else None
    writer = None
    if fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["B", "C", "local", "verdict", "witness"])
    try:
        if mode == "local":
            loc = 0
            Bs = _axis(T)
            for C, mask in _local_rows(n, T):
                loc += int(mask.sum())
                if writer:
                    for B, ok in zip(Bs, mask):
                        writer.writerow([B, C, int(ok), "", ""])
            return SweepResult(n, T, mode, total, loc, 0, 0, loc, time.perf_counter() - t0)
        bound = bound or SWEEP_BOUND
        jobs = [(B, n, T, bound) for B in _axis(T)]
        if threads > 1:
            with ProcessPoolExecutor(max_workers=threads) as ex:
                rows = list(ex.map(_global_row, jobs, chunksize=4))
        else:
            rows = [_global_row(j) for j in jobs]
        counts = {"loc": 0, Status.SOLVABLE.value: 0, Status.UNSOLVABLE.value: 0, Status.UNDECIDED.value: 0}
        for row in rows:
            for B, C, loc, verdict, wit in row:
                if loc:
                    counts["loc"] += 1
                    counts[verdict] += 1
                if writer:
                    w = "" if wit is None else " ".join(str(t) for t in wit)
                    writer.writerow([B, C, int(loc), verdict or "", w])
        return SweepResult(n, T, mode, total, counts["loc"], counts[Status.SOLVABLE.value],
                           counts[Status.UNSOLVABLE.value], counts[Status.UNDECIDED.value],
                           time.perf_counter() - t0)
    finally:
        if fh:
            fh.close()


# ------------------------------------------------------------- constants

@dataclass(frozen=True)
class ConstantEnclosure:
    name: str
    lower: Fraction
    upper: Fraction
    X: int

    def __post_init__(self):
        if self.lower > self.upper:
            raise ArithmeticError("empty enclosure")

    def contains(self, other: "ConstantEnclosure") -> bool:
        return self.lower <= other.lower and other.upper <= self.upper

    def within(self, lo, hi) -> bool:
        return Fraction(lo) <= self.lower and self.upper <= Fraction(hi)

    def as_dict(self) -> dict:
        return {"name": self.name, "X": self.X, "lower": f"{self.lower.numerator}/{self.lower.denominator}",
                "upper": f"{self.upper.numerator}/{self.upper.denominator}",
                "lower_decimal": _dec(self.lower, 12, floor=True), "upper_decimal": _dec(self.upper, 12, floor=False)}


def _dec(q: Fraction, digits: int, floor: bool) -> str:
    s = 10**digits
    v = q.numerator * s // q.denominator
    if not floor and v * q.denominator != q.numerator * s:
        v += 1
    return f"{v // s}.{v % s:0{digits}d}"


_BITS = 256


class _Interval:
    """Positive reals as [lo, hi] / 2^256 with outward rounding."""

    S = 1 << _BITS

    def __init__(self, lo: int, hi: int):
        self.lo, self.hi = lo, hi

    @classmethod
    def of(cls, q: Fraction) -> "_Interval":
        q = Fraction(q)
        lo = q.numerator * cls.S // q.denominator
        hi = -(-q.numerator * cls.S // q.denominator)
        return cls(lo, hi)

    @classmethod
    def span(cls, a: Fraction, b: Fraction) -> "_Interval":
        return cls(cls.of(a).lo, cls.of(b).hi)

    def mul_q(self, num: int, den: int) -> "_Interval":
        return _Interval(self.lo * num // den, -(-self.hi * num // den))

    def mul(self, o: "_Interval") -> "_Interval":
        return _Interval(self.lo * o.lo >> _BITS, -(-(self.hi * o.hi) >> _BITS))

    def div(self, o: "_Interval") -> "_Interval":
        return _Interval((self.lo << _BITS) // o.hi, -(-(self.hi << _BITS) // o.lo))

    def sqrt(self) -> "_Interval":
        lo = math.isqrt(self.lo << _BITS)
        hi = math.isqrt(self.hi << _BITS)
        if hi * hi < self.hi << _BITS:
            hi += 1
        return _Interval(lo, hi)

    def fractions(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.lo, self.S), Fraction(self.hi, self.S)


def _zeta2_tail(primes) -> _Interval:
    """prod over p > X of (1 - p^-2) = (6 / pi^2) / prod over p <= X of (1 - p^-2)."""
    head = _Interval(_Interval.S, _Interval.S)
    for p in primes:
        head = head.mul_q(p * p - 1, p * p)
    six_over_pi2 = _Interval.span(6 / _PI_HI**2, 6 / _PI_LO**2)
    return six_over_pi2.div(head)


def _check_X(X: int):
    if X < 100:
        raise ValueError("truncation X must be at least 100")


def kappa1(X: int) -> ConstantEnclosure:
    """kappa1 = pi^(-1/2) prod_p (1 + 1/2p)(1 - 1/p)^(1/2).

    The squared Euler factor is 1 - 3/(4p^2) - 1/(4p^3). Beyond X it lies
    between (1 - p^-2)^(3/4) (1 - 0.4 p^-3) and (1 - p^-2)^(3/4), so the
    tail is bracketed by the zeta(2) tail."""
    _check_X(X)
    primes = [int(p) for p in primes_up_to(X)]
    head = _Interval(_Interval.S, _Interval.S)
    for p in primes:
        head = head.mul_q((2 * p + 1) ** 2 * (p - 1), 4 * p**3)
    t = _zeta2_tail(primes)
    t34 = t.sqrt().mul(t.sqrt().sqrt())
    # sum over m > X of m^-3 is at most 1/(2 (X-1)^2)
    slack = _Interval.of(1 - Fraction(2, 10 * (X - 1) ** 2))
    tail = _Interval(t34.mul(slack).lo, t34.hi)
    inv_pi = _Interval.span(1 / _PI_HI, 1 / _PI_LO)
    lo, hi = head.mul(tail).mul(inv_pi).sqrt().fractions()
    return ConstantEnclosure("kappa1", lo, hi, X)


def kappa2_euler_factor(p: int) -> Fraction:
    """1 - p^-2 - (1/2) p^-2 (1 - 1/p) * 2p/(2p+1), the inner geometric sum in closed form."""
    return 1 - Fraction(1, p * p) - Fraction(1, 2 * p * p) * (1 - Fraction(1, p)) * Fraction(2 * p, 2 * p + 1)


def kappa2(X: int) -> ConstantEnclosure:
    """kappa2 = M(1), a product of the factors above.

    A factor equals 1 - 3/(2p^2) + 3/(2p^2 (2p+1)); it lies between
    (1 - p^-2)^(3/2) and (1 - p^-2)^(3/2) (1 + 1.2 p^-3)."""
    _check_X(X)
    primes = [int(p) for p in primes_up_to(X)]
    head = _Interval(_Interval.S, _Interval.S)
    for p in primes:
        q = kappa2_euler_factor(p)
        head = head.mul_q(q.numerator, q.denominator)
    t = _zeta2_tail(primes)
    t32 = t.mul(t.sqrt())
    slack = _Interval.of(1 + Fraction(12, 10 * (X - 1) ** 2))
    tail = _Interval(t32.lo, t32.mul(slack).hi)
    lo, hi = head.mul(tail).fractions()
    return ConstantEnclosure("kappa2", lo, hi, X)


def density_product(n: int, P: int) -> Fraction:
    """density_factor_2(n) times the odd local density factors for p <= P."""
    out = density_factor_2(n)
    for p in primes_up_to(P):
        p = int(p)
        if p > 2:
            out *= local_density_factor(p, n)
    return out
