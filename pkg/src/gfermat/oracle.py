"""Brute-force ground truth: bounded searches for primitive solutions and
p-adic solubility by exhaustive lifting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import Instance, kronecker, squarefree_split, valuation


class Inconclusive(Exception):
    """Raised when lifting hits the depth cap with live undecided branches."""


def _v(a: int, p: int, cap: int) -> int:
    # valuation of a residue known mod p^cap; a == 0 counts as cap
    if a == 0:
        return cap
    v = 0
    while a % p == 0 and v < cap:
        a //= p
        v += 1
    return v


def default_depth(inst: Instance, p: int) -> int:
    return 2 * (_v(inst.B, p, 10**6) + _v(inst.C, p, 10**6)) + 4 * inst.n + 8


def local_solvable_exhaustive(inst: Instance, p: int, depth: int | None = None) -> bool:
    """Decide whether x^2 + B y^2 = C z^n has a primitive Z_p-point by lifting.

    A primitive point has (y, z) not both divisible by p, since otherwise x
    would be a unit with x^2 = 0 mod p. So we refine residue classes of (y, z)
    mod p^m. In a class, a = C z^n - B y^2 is either determined well enough to
    tell whether it is a square in Z_p (giving x, or killing the class), or is
    0 mod p^m; then Hensel's lemma on G(y, z) = B y^2 - C z^n certifies a root
    [0 : y : z] once m exceeds twice the gradient valuation."""
    B, C, n = inst.B, inst.C, inst.n
    if depth is None:
        depth = default_depth(inst, p)
    need = 3 if p == 2 else 1
    pw = [p**k for k in range(depth + 2)]
    stuck = False
    # (x, y, z) -> (x, -y, z) is a symmetry, so y = 0 .. (p-1)/2 suffices at the top
    stack = [(1, y, z) for y in range(p // 2 + 1) for z in range(p) if y or z]
    stack.reverse()
    while stack:
        m, y, z = stack.pop()
        pm = pw[m]
        a = (C * pow(z, n, pm) - B * y * y) % pm
        if a == 0:
            g = min(_v(2 * B * y % pm, p, m), _v(n * C * pow(z, n - 1, pm) % pm, p, m))
            if g < m and m > 2 * g:
                return True
        else:
            v = 0
            while a % pw[v + 1] == 0:
                v += 1
            if v % 2:
                continue
            if m - v >= need:
                u = (a // pw[v]) % (8 if p == 2 else p)
                if (u == 1) if p == 2 else (kronecker(u, p) == 1):
                    return True
                continue
        if m >= depth:
            stuck = True
            continue
        for i in range(p - 1, -1, -1):
            yi = y + i * pm
            for j in range(p - 1, -1, -1):
                stack.append((m + 1, yi, z + j * pm))
    if stuck:
        raise Inconclusive(f"lifting undecided at depth {depth} for p={p}")
    return False


# ------------------------------------------------------------ point filters

def star_level(B: int, x: int, y: int, p: int) -> int:
    """Largest r with u = x + f y sqrt(-B0) in p^r O_K, where B = f^2 B0."""
    sq = squarefree_split(B)
    X, Y = x, sq.f * y
    if X == 0 and Y == 0:
        raise ValueError("u = 0")
    vx = valuation(X, p) if X else None
    vy = valuation(Y, p) if Y else None
    s = min(v for v in (vx, vy) if v is not None)
    # with B0 = 3 mod 4, (X + Y sqrt(-B0))/2 is integral when X, Y are both odd
    if p == 2 and sq.B0 % 4 == 3 and vx == vy:
        return s + 1
    return s


def is_tilde0(B: int, x: int, y: int) -> bool:
    """2 || u and 2 does not divide x."""
    return x % 2 == 1 and star_level(B, x, y, 2) == 1


@dataclass(frozen=True)
class PointFilter:
    star0: tuple[int, ...] = ()      # primes p with p^0 || u
    tilde0: bool = False             # 2 || u and x odd
    y_coprime: tuple[int, ...] = ()
    z_coprime: tuple[int, ...] = ()

    def accepts(self, B: int, x: int, y: int, z: int) -> bool:
        for p in self.y_coprime:
            if y % p == 0:
                return False
        for p in self.z_coprime:
            if z % p == 0:
                return False
        for p in self.star0:
            if star_level(B, x, y, p) != 0:
                return False
        if self.tilde0 and not is_tilde0(B, x, y):
            return False
        return True


@dataclass(frozen=True)
class SearchBound:
    z_max: int = 200
    y_max: int = 10**5
    x_max: int | None = None
    filter: PointFilter = field(default_factory=PointFilter)

    def __post_init__(self):
        if self.z_max < 0 or self.y_max < 0:
            raise ValueError("bounds must be nonnegative")


# Quadratic residues used to reject non-squares cheaply
_QR64 = {i * i % 64 for i in range(64)}
_QR63 = {i * i % 63 for i in range(63)}
_QR65 = {i * i % 65 for i in range(65)}


def _isqrt_exact(v: int) -> int | None:
    if v < 0:
        return None
    if v % 64 not in _QR64 or v % 63 not in _QR63 or v % 65 not in _QR65:
        return None
    r = math.isqrt(v)
    return r if r * r == v else None


def _y_window(B: int, Cz: int, bound: SearchBound) -> tuple[int, int]:
    # y >= 0 with Cz - B y^2 >= 0, |y| <= y_max and, if set, x^2 <= x_max^2
    hi = bound.y_max
    lo = 0
    if B > 0:
        if Cz < 0:
            return 1, 0
        hi = min(hi, math.isqrt(Cz // B))
        if bound.x_max is not None:
            t = Cz - bound.x_max**2
            if t > 0:
                lo = max(lo, -(-t // B))
                while lo > 0 and Cz - B * (lo - 1) ** 2 <= bound.x_max**2:
                    lo -= 1
                while Cz - B * lo * lo > bound.x_max**2:
                    lo += 1
    elif B < 0:
        b = -B
        if Cz < 0:
            lo = math.isqrt(-Cz // b)
            while b * lo * lo + Cz < 0:
                lo += 1
        if bound.x_max is not None:
            # x^2 = Cz + b y^2 <= X^2
            t = bound.x_max**2 - Cz
            if t < 0:
                return 1, 0
            hi = min(hi, math.isqrt(t // b))
    return lo, hi


def _scan(B: int, C: int, n: int, z: int, bound: SearchBound):
    Cz = C * z**n
    lo, hi = _y_window(B, Cz, bound)
    if lo > hi:
        return []
    ys = _square_hits(B, Cz, lo, hi)
    out = []
    for y, x in ys:
        if bound.x_max is not None and x > bound.x_max:
            continue
        if math.gcd(math.gcd(x, y), z) != 1:
            continue
        for sx in ((x, -x) if x and y else (x,)):
            if bound.filter.accepts(B, sx, y, z):
                out.append((sx, y, z))
    return out


def _square_hits(B: int, Cz: int, lo: int, hi: int) -> list[tuple[int, int]]:
    """Pairs (y, x) with lo <= y <= hi, x >= 0 and x^2 = Cz - B y^2."""
    big = max(abs(Cz), abs(B) * hi * hi)
    if hi - lo < 64 or big >= 1 << 62:
        res = []
        for y in range(lo, hi + 1):
            r = _isqrt_exact(Cz - B * y * y)
            if r is not None:
                res.append((y, r))
        return res
    import numpy as np

    res = []
    step = 1 << 16
    for start in range(lo, hi + 1, step):
        ys = np.arange(start, min(hi, start + step - 1) + 1, dtype=np.int64)
        vals = Cz - B * ys * ys
        ok = vals >= 0
        r = np.sqrt(np.where(ok, vals, 0).astype(np.float64)).astype(np.int64)
        # correct float rounding
        r -= (r * r > vals).astype(np.int64)
        r += ((r + 1) * (r + 1) <= vals).astype(np.int64)
        hit = ok & (r * r == vals)
        for i in np.flatnonzero(hit):
            res.append((int(ys[i]), int(r[i])))
    return res


def search_primitive(inst: Instance, bound: SearchBound, limit: int | None = None) -> list[tuple[int, int, int]]:
    """Primitive solutions with |z| <= z_max, 0 <= y <= y_max (x takes both signs).

    Points are listed once per weighted-projective class: (x, y, z) and
    (-x, -y, z) are the same point, so y >= 0 is enforced. Order: |z| ascending
    (positive z first), then y ascending, then x >= 0 before -x."""
    B, C, n = inst.B, inst.C, inst.n
    out: list[tuple[int, int, int]] = []
    # z = 0 needs -B to be a square; then (sqrt(-B), 1, 0) is the only primitive point up to sign
    if -B > 0 and math.isqrt(-B) ** 2 == -B and bound.y_max >= 1:
        r = math.isqrt(-B)
        for sx in ((r, -r) if r else (0,)):
            if bound.filter.accepts(B, sx, 1, 0) and (bound.x_max is None or r <= bound.x_max):
                out.append((sx, 1, 0))
    for az in range(1, bound.z_max + 1):
        for z in (az, -az):
            out.extend(_scan(B, C, n, z, bound))
            if limit is not None and len(out) >= limit:
                return out[:limit]
    return out


def first_witness(inst: Instance, bound: SearchBound) -> tuple[int, int, int] | None:
    hits = search_primitive(inst, bound, limit=1)
    return hits[0] if hits else None


def search_box(inst: Instance, x_max: int, y_max: int, limit: int | None = None) -> list[tuple[int, int, int]]:
    """Primitive solutions with |x| <= x_max and 0 <= y <= y_max, any z.

    Vectorized over x for each y; values must fit in int64. Points come out
    with y ascending, then x ascending."""
    B, C, n = inst.B, inst.C, inst.n
    if x_max * x_max + abs(B) * y_max * y_max >= 2**62:
        raise OverflowError("box too large for int64 arithmetic")
    xs = np.arange(-x_max, x_max + 1, dtype=np.int64)
    x2 = xs * xs
    out: list[tuple[int, int, int]] = []
    for y in range(y_max + 1):
        v = x2 + np.int64(B * y * y)
        hit = v % C == 0
        if not hit.any():
            continue
        w = v[hit] // C
        r = np.rint(np.sign(w) * np.abs(w).astype(np.float64) ** (1.0 / n)).astype(np.int64)
        for x, wi, ri in zip(xs[hit].tolist(), w.tolist(), r.tolist()):
            for z in (ri - 1, ri, ri + 1):
                if z**n == wi and math.gcd(math.gcd(x, y), z) == 1:
                    if y == 0 and x < 0:
                        continue
                    out.append((x, y, z))
                    break
            if limit is not None and len(out) >= limit:
                return out
    return out
