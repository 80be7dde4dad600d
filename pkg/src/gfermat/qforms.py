"""Binary quadratic forms: reduction, composition and class groups of quadratic orders."""
from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass, field
from enum import Enum

from .arith import factorize, is_square, kronecker, sqrt_mod_prime

MAX_ABS_DISC = 10**8


class ResourceError(RuntimeError):
    pass


def check_discriminant(D: int) -> int:
    if D == 0 or D % 4 not in (0, 1) or is_square(D):
        raise ValueError(f"{D} is not a nonsquare discriminant")
    return D


@dataclass(frozen=True, order=True)
class QForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_primitive(self) -> bool:
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def inverse(self) -> "QForm":
        return QForm(self.a, -self.b, self.c)

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def evaluate(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y


def principal_form(D: int) -> QForm:
    b = D % 2
    return QForm(1, b, (b * b - D) // 4)


# --------------------------------------------------------------- reduction

def _reduce_definite(f: QForm) -> QForm:
    a, b, c = f
    while True:
        if c < a:
            a, b, c = c, -b, a
        if b > a or b <= -a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
            continue
        break
    if a == c and b < 0:
        b = -b
    return QForm(a, b, c)


def _is_reduced_indefinite(f: QForm, s: int) -> bool:
    # |sqrt(D) - 2|a|| < b < sqrt(D), with s = isqrt(D) and D not a square
    a, b, _ = f
    A = abs(a)
    return 0 < b <= s and 2 * A - b <= s and 2 * A + b > s


def _rho(f: QForm, D: int, s: int) -> QForm:
    # one step of the reduction operator on indefinite forms
    a, b, c = f
    C = abs(c)
    if C > s:
        # r = -b mod 2C with -C < r <= C
        r = (-b) % (2 * C)
        if r > C:
            r -= 2 * C
    else:
        # largest r = -b mod 2C with r <= s (then r > sqrt(D) - 2C)
        r = s - ((s + b) % (2 * C))
    return QForm(c, r, (r * r - D) // (4 * c))


def _reduce_indefinite(f: QForm) -> QForm:
    D = f.disc
    s = math.isqrt(D)
    g = f
    for _ in range(10**6):
        if _is_reduced_indefinite(g, s):
            return g
        g = _rho(g, D, s)
    raise RuntimeError("indefinite reduction did not terminate")


def cycle(f: QForm) -> list[QForm]:
    """The rho-cycle of a reduced indefinite form."""
    D = f.disc
    s = math.isqrt(D)
    out = [f]
    g = _rho(f, D, s)
    while g != f:
        out.append(g)
        g = _rho(g, D, s)
    return out


def reduce(f: QForm) -> QForm:
    """Canonical reduced representative of the proper class of f."""
    if not f.is_primitive():
        raise ValueError(f"{f} is not primitive")
    D = f.disc
    if D < 0:
        if f.a < 0:
            raise ValueError("negative definite forms are not used")
        return _reduce_definite(f)
    g = _reduce_indefinite(f)
    grp = _GROUPS.peek(D)
    if grp is not None:
        return grp.canonical(g)
    return min(cycle(g))


# ------------------------------------------------------------- composition

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def compose_raw(f1: QForm, f2: QForm) -> QForm:
    """Dirichlet composition, unreduced."""
    D = f1.disc
    if f2.disc != D:
        raise ValueError("discriminant mismatch")
    a1, b1, c1 = f1
    a2, b2, c2 = f2
    s = (b1 + b2) // 2
    n = b2 - s
    g1, u1, v1 = _xgcd(a1, a2)
    d, u2, w = _xgcd(g1, s)
    u, v = u1 * u2, v1 * u2
    # u a1 + v a2 + w s = d
    a3 = a1 * a2 // (d * d)
    b3 = b2 + 2 * (a2 // d) * (v * (s - b2) - w * c2)
    b3 %= 2 * abs(a3)
    c3 = (b3 * b3 - D) // (4 * a3)
    _ = n, u
    return QForm(a3, b3, c3)


def compose(f1: QForm, f2: QForm) -> QForm:
    return reduce(compose_raw(f1, f2))


def power(f: QForm, e: int) -> QForm:
    if e < 0:
        f, e = f.inverse(), -e
    result = reduce(principal_form(f.disc))
    base = reduce(f)
    while e:
        if e & 1:
            result = compose(result, base)
        base = compose(base, base)
        e >>= 1
    return result


# ------------------------------------------------------------ enumeration

def reduced_forms(D: int) -> list[QForm]:
    """All primitive reduced forms of discriminant D.

    For D < 0 these are the class representatives; for D > 0 every reduced
    form, several per class (the cycles)."""
    check_discriminant(D)
    if abs(D) > MAX_ABS_DISC:
        raise ResourceError(f"|D| = {abs(D)} exceeds the supported range {MAX_ABS_DISC}")
    out = []
    if D < 0:
        amax = math.isqrt(-D // 3)
        for a in range(1, amax + 1):
            for b in range(-a + 1, a + 1):
                if (b - D) % 2:
                    continue
                num = b * b - D
                if num % (4 * a):
                    continue
                c = num // (4 * a)
                if c < a or (c == a and b < 0):
                    continue
                if math.gcd(math.gcd(a, b), c) == 1:
                    out.append(QForm(a, b, c))
        return out
    s = math.isqrt(D)
    for b in range(1, s + 1):
        if (b - D) % 2:
            continue
        m = (D - b * b) // 4
        lo, hi = (s + 1 - b + 1) // 2, (s + b) // 2
        for a in _divisors(m):
            if a < lo or a > hi:
                continue
            for sa in (a, -a):
                f = QForm(sa, b, -m // sa)
                if f.is_primitive():
                    out.append(f)
    return out


def _divisors(m: int) -> list[int]:
    ds = [1]
    for p, e in factorize(m).factors:
        ds = [d * p**i for d in ds for i in range(e + 1)]
    return sorted(ds)


# ------------------------------------------------------------ class groups

def _smith(rel: list[list[int]]) -> tuple[list[int], list[list[int]]]:
    """Smith normal form of a square integer matrix.

    Returns the diagonal and a unimodular V with (row lattice of rel) * V equal
    to the row lattice of diag; column operations are tracked in V."""
    k = len(rel)
    A = [row[:] for row in rel]
    V = [[int(i == j) for j in range(k)] for i in range(k)]

    def col_op(i, j, q):  # col_j -= q col_i
        for r in range(k):
            A[r][j] -= q * A[r][i]
            V[r][j] -= q * V[r][i]

    def swap_cols(i, j):
        for r in range(k):
            A[r][i], A[r][j] = A[r][j], A[r][i]
            V[r][i], V[r][j] = V[r][j], V[r][i]

    for t in range(k):
        while True:
            piv = None
            for i in range(t, k):
                for j in range(t, k):
                    if A[i][j] and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                break
            i, j = piv
            A[t], A[i] = A[i], A[t]
            swap_cols(t, j)
            done = True
            for j in range(t + 1, k):
                q = A[t][j] // A[t][t]
                if q:
                    col_op(t, j, q)
                if A[t][j]:
                    done = False
            for i in range(t + 1, k):
                q = A[i][t] // A[t][t]
                if q:
                    A[i] = [x - q * y for x, y in zip(A[i], A[t])]
                if A[i][t]:
                    done = False
            if not done:
                continue
            # divisibility condition d_t | every remaining entry
            bad = next(((i, j) for i in range(t + 1, k) for j in range(t + 1, k)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            A[t] = [x + y for x, y in zip(A[t], A[bad[0]])]
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
    return [abs(A[i][i]) for i in range(k)], V


class ClassGroup:
    """Finite abelian group of proper classes of primitive forms of discriminant D."""

    def __init__(self, D: int):
        check_discriminant(D)
        self.D = D
        forms = reduced_forms(D)
        if D < 0:
            reps = forms
            self._canon = {f: f for f in forms}
        else:
            self._canon = {}
            reps = []
            for f in sorted(forms):
                if f in self._canon:
                    continue
                cyc = cycle(f)
                rep = min(cyc)
                for g in cyc:
                    self._canon[g] = rep
                reps.append(rep)
        self.classes: list[QForm] = sorted(set(reps))
        self.h = len(self.classes)
        self.identity = self.canonical_any(principal_form(D))
        self._build()

    # canonical representative of a class, from any reduced form
    def canonical(self, g: QForm) -> QForm:
        return self._canon[g]

    def canonical_any(self, f: QForm) -> QForm:
        g = _reduce_definite(f) if self.D < 0 else _reduce_indefinite(f)
        return self._canon[g]

    def mul(self, x: QForm, y: QForm) -> QForm:
        return self.canonical_any(compose_raw(x, y))

    def pow(self, x: QForm, e: int) -> QForm:
        if e < 0:
            x, e = self.canonical_any(x.inverse()), -e
        r, b = self.identity, x
        while e:
            if e & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            e >>= 1
        return r

    def _build(self):
        # grow a subgroup one element at a time, recording relations
        gens: list[QForm] = []
        rels: list[list[int]] = []
        vec: dict[QForm, tuple[int, ...]] = {self.identity: ()}
        for g in self.classes:
            if g in vec:
                continue
            k = len(gens)
            # smallest e with g^e in the current subgroup
            e, cur = 1, g
            while cur not in vec:
                cur = self.mul(cur, g)
                e += 1
            gens.append(g)
            rel = list(vec[cur]) + [0] * (k - len(vec[cur]))
            rels = [r + [0] for r in rels]
            rels.append([-x for x in rel] + [e])
            new = {}
            for elt, v in vec.items():
                v = tuple(v) + (0,) * (k - len(v))
                cur = elt
                for i in range(e):
                    new[cur] = v + (i,)
                    cur = self.mul(cur, g)
            vec = new
        k = len(gens)
        vec = {x: tuple(v) + (0,) * (k - len(v)) for x, v in vec.items()}
        if k == 0:
            self.elementary_divisors: list[int] = []
            self.generators: list[QForm] = []
            self._dlog = {self.identity: ()}
            return
        diag, V = _smith(rels)
        # new coordinates: v -> v V, reduced mod diag
        keep = [i for i, d in enumerate(diag) if d != 1]
        self.elementary_divisors = [diag[i] for i in keep]
        Vinv = _inverse_unimodular(V)
        self.generators = []
        for i in keep:
            g = self.identity
            for j in range(k):
                if Vinv[i][j]:
                    g = self.mul(g, self.pow(gens[j], Vinv[i][j]))
            self.generators.append(g)
        self._dlog = {}
        for x, v in vec.items():
            w = [sum(v[r] * V[r][i] for r in range(k)) for i in range(k)]
            self._dlog[x] = tuple(w[i] % diag[i] for i in keep)
        order = 1
        for d in self.elementary_divisors:
            order *= d
        if order != self.h:
            raise ArithmeticError("class group structure inconsistent with class number")

    def dlog(self, f: QForm) -> tuple[int, ...]:
        return self._dlog[self.canonical_any(f)]

    def element(self, v) -> QForm:
        g = self.identity
        for gen, e in zip(self.generators, v):
            g = self.mul(g, self.pow(gen, e))
        return g

    def order_of(self, f: QForm) -> int:
        v = self.dlog(f)
        o = 1
        for x, d in zip(v, self.elementary_divisors):
            o = math.lcm(o, d // math.gcd(x, d))
        return o

    def in_nth_powers(self, v, n: int) -> bool:
        return all(x % math.gcd(n, d) == 0 for x, d in zip(v, self.elementary_divisors))

    def summary(self) -> dict:
        return {
            "discriminant": self.D,
            "class_number": self.h,
            "elementary_divisors": list(self.elementary_divisors),
            "generators": [tuple(g) for g in self.generators],
        }


def _inverse_unimodular(V: list[list[int]]) -> list[list[int]]:
    from fractions import Fraction

    k = len(V)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(k)] for i, row in enumerate(V)]
    for c in range(k):
        piv = next(r for r in range(c, k) if M[r][c] != 0)
        M[c], M[piv] = M[piv], M[c]
        pv = M[c][c]
        M[c] = [x / pv for x in M[c]]
        for r in range(k):
            if r != c and M[r][c] != 0:
                q = M[r][c]
                M[r] = [x - q * y for x, y in zip(M[r], M[c])]
    out = [[int(x) for x in row[k:]] for row in M]
    return out


class _GroupCache:
    """Process-wide memo of class groups keyed by discriminant.

    Lookups are lock-free dict reads; construction and insertion are serialized."""

    def __init__(self, maxsize: int):
        self.maxsize = maxsize
        self._d: dict[int, ClassGroup] = {}
        self._lock = threading.Lock()

    def peek(self, D: int) -> ClassGroup | None:
        return self._d.get(D)

    def get(self, D: int) -> ClassGroup:
        g = self._d.get(D)
        if g is not None:
            return g
        with self._lock:
            g = self._d.get(D)
            if g is None:
                g = ClassGroup(D)
                if len(self._d) >= self.maxsize:
                    self._d.pop(next(iter(self._d)))
                self._d[D] = g
            return g


_GROUPS = _GroupCache(int(os.environ.get("GFERMAT_CACHE_SIZE", "4096")))


def class_group(D: int) -> ClassGroup:
    return _GROUPS.get(D)


# ----------------------------------------------------------------- primes

class SplittingType(Enum):
    SPLIT = "split"
    INERT = "inert"
    RAMIFIED = "ramified"


def splitting(D: int, p: int) -> SplittingType:
    k = kronecker(D, p)
    return {1: SplittingType.SPLIT, -1: SplittingType.INERT, 0: SplittingType.RAMIFIED}[k]


def fundamental_part(D: int) -> tuple[int, int]:
    """(D_K, conductor) with D = conductor^2 * D_K and D_K fundamental."""
    check_discriminant(D)
    fac = factorize(D)
    d0, g = fac.sign, 1
    for p, e in fac.factors:
        g *= p ** (e // 2)
        if e % 2:
            d0 *= p
    if d0 % 4 != 1:
        d0 *= 4
        g //= 2
    return d0, g


def prime_form(D: int, p: int) -> QForm:
    """A form (p, b, c) of discriminant D attached to a prime ideal above p."""
    check_discriminant(D)
    if splitting(D, p) is SplittingType.INERT:
        raise ValueError(f"{p} is inert for discriminant {D}")
    _, cond = fundamental_part(D)
    if cond % p == 0:
        raise ValueError(f"{p} divides the conductor of discriminant {D}")
    if p == 2:
        b = next(b for b in range(4) if (b * b - D) % 8 == 0)
    else:
        r = sqrt_mod_prime(D, p)
        # smallest b >= 0 with b = +-r mod p and b = D mod 2; then b^2 = D mod 4p
        b = min(x for x in (r, p - r, r + p, 2 * p - r) if (x - D) % 2 == 0)
    return QForm(p, b, (b * b - D) // (4 * p))


def extend_to_overorder(f: QForm) -> QForm:
    """Image of a class of discriminant 4D in the class group of discriminant D.

    The ideal of an odd-norm form is extended to the order with half the
    conductor; this is the natural surjection Cl(4D) -> Cl(D)."""
    a, b, c = f
    if b % 2:
        raise ValueError("discriminant must be divisible by 4")
    if a % 2 == 0:
        a, b, c = c, -b, a
    if a % 2 == 0:
        raise ValueError("form is not primitive")
    D = (b * b - 4 * a * c) // 4
    h = b // 2
    B1 = h if (h - D) % 2 == 0 else h + a
    return QForm(a, B1, (B1 * B1 - D) // (4 * a))


def principal_classes(G: ClassGroup) -> set[tuple[int, ...]]:
    """Class vectors of ideals with some generator (any sign of norm).

    Trivial for D < 0; for D > 0 also the narrow class of negative-norm generators."""
    out = {G.dlog(G.identity)}
    if G.D > 0:
        p = principal_form(G.D)
        out.add(G.dlog(QForm(-p.a, p.b, -p.c)))
    return out


def is_nth_power_class(f: QForm, n: int, G: ClassGroup) -> bool:
    return G.in_nth_powers(G.dlog(f), n)


# ---------------------------------------------------------------- orders

@dataclass(frozen=True)
class QuadOrder:
    B0: int
    f: int
    case: str          # which of the four order definitions applies
    conductor: int
    disc: int

    @property
    def field_disc(self) -> int:
        return field_discriminant(self.B0)


def field_discriminant(B0: int) -> int:
    """Discriminant of Q(sqrt(-B0)) for squarefree B0 != -1."""
    d = -B0
    return d if d % 4 == 1 else 4 * d


def order_for(B0: int, f: int, C: int) -> QuadOrder:
    """The order attached to (B0, f) and the parity of C."""
    if B0 == -1:
        raise ValueError("B0 = -1 means -B is a square; handled separately")
    if math.gcd(f, C) != 1:
        raise ValueError("gcd(f, C) must be 1")
    dK = field_discriminant(B0)
    r = B0 % 8
    if r in (1, 2, 5, 6):
        case, cond = "Z[f*sqrt(-B0)]", f
    elif r == 3 and C % 2:
        case, cond = "Z[f*sqrt(-B0)], conductor 2f", 2 * f
    elif r == 3:
        case, cond = "Z[f*(1+sqrt(-B0))/2], C even", f
    else:
        case, cond = "Z[f*(1+sqrt(-B0))/2]", f
    return QuadOrder(B0, f, case, cond, cond * cond * dK)


# ----------------------------------------------------- class number formula

def _units_definite(D: int) -> int:
    return {-3: 6, -4: 4}.get(D, 2)


def positive_unit(D: int) -> tuple[int, int]:
    """(t, u) for the totally positive fundamental unit (t + u sqrt(D))/2, D > 0.

    Read off the automorph obtained by running once around the principal cycle."""
    s = math.isqrt(D)
    f0 = _reduce_indefinite(principal_form(D))
    # track the transformation matrix along rho steps
    M = (1, 0, 0, 1)
    g = f0
    while True:
        a, b, c = g
        h = _rho(g, D, s)
        # h = g o [[0, -1], [1, k]] with k = (h.b + b) / (2c)
        k = (h.b + b) // (2 * c)
        m11, m12, m21, m22 = M
        M = (m12, -m11 + k * m12, m22, -m21 + k * m22)
        g = h
        if g == f0:
            break
    m11, m12, m21, m22 = M
    t = m11 + m22
    a0, b0, _ = f0
    u = m21 // a0
    if t < 0:
        t, u = -t, -u
    if u < 0:
        u = -u
    if t * t - D * u * u != 4:
        # an odd cycle yields a norm -1 automorph; square it
        t, u = (t * t + D * u * u) // 2, t * u
        if t * t - D * u * u != 4:
            raise ArithmeticError("automorph does not give a unit")
    return t, u


def unit_index(D: int, r: int) -> int:
    """[O_D^x : O_{D r^2}^x] (totally positive units when D > 0)."""
    if D < 0:
        return _units_definite(D) // _units_definite(D * r * r)
    t, u = positive_unit(D)
    # powers of eps = (t + u sqrt D)/2 until the coefficient is divisible by r
    T, U, k = t, u, 1
    while U % r:
        T, U = (T * t + D * U * u) // 2, (T * u + U * t) // 2
        k += 1
    return k


def class_number_ratio_check(K_disc: int, cond1: int, cond2: int) -> bool:
    """Both sides of the class number formula for orders of conductors cond1 | cond2."""
    lhs, rhs = class_number_ratio_sides(K_disc, cond1, cond2)
    return lhs == rhs


def class_number_ratio_sides(K_disc: int, cond1: int, cond2: int):
    from fractions import Fraction

    if cond2 % cond1:
        raise ValueError("cond1 must divide cond2")
    D1 = cond1 * cond1 * K_disc
    D2 = cond2 * cond2 * K_disc
    r = cond2 // cond1
    h1 = class_group(D1).h
    h2 = class_group(D2).h
    lhs = Fraction(h2, h1) * unit_index(D1, r)
    rhs = Fraction(r)
    for p, _ in factorize(r).factors:
        rhs *= 1 - Fraction(kronecker(D1, p), p)
    return lhs, rhs
