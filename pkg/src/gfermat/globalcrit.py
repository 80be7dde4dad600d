"""Class-group criterion for points satisfying the star-0 and tilde-star-0 conditions.

Here B = f^2 B0 with gcd(f, C) = 1 and B0 != -1. The ideal C O_K must factor as
j+ j- r^2 with j+- conjugate, supported on split primes, and r a product of
distinct ramified primes (times 2^ell in the tilde case). The class of j+ meet O
in Cl(O) decides: it must lie in n Cl(O) (star-0), or in +-[p2^(2-ell)] + n Cl(O)
(tilde). Ramified classes are 2-torsion and vanish modulo n."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .arith import factorize, is_square, squarefree_split, valuation
from .qforms import (QuadOrder, SplittingType, class_group, extend_to_overorder,
                     field_discriminant, order_for, prime_form, principal_classes,
                     splitting, unit_index)

MAX_PATTERNS = 1 << 20


class PreconditionError(ValueError):
    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code


@dataclass
class CFactorization:
    ell: int
    ramified_part: list[tuple[int, int]]
    split_part: list[tuple[int, int]]
    inert_primes: list[int]
    obstruction: str | None = None     # "inert", "ramified-square", "tilde-2-adic"
    obstruction_prime: int | None = None

    @property
    def ok(self) -> bool:
        return self.obstruction is None


@dataclass
class GlobalCertificate:
    order: QuadOrder
    class_group: dict
    j_plus_class_vector: tuple[int, ...] | None
    membership: bool
    clause: str
    target_vector: tuple[int, ...] | None = None

    def as_dict(self) -> dict:
        return {
            "order": {"B0": self.order.B0, "f": self.order.f, "ring": self.order.case,
                      "conductor": self.order.conductor, "discriminant": self.order.disc},
            "class_group": self.class_group,
            "j_plus_class_vector": None if self.j_plus_class_vector is None else list(self.j_plus_class_vector),
            "target_vector": None if self.target_vector is None else list(self.target_vector),
            "membership": self.membership,
            "clause": self.clause,
        }


@dataclass
class GlobalVerdict:
    solvable: bool
    reason: str
    certificate: GlobalCertificate | None = None
    factorization: CFactorization | None = None


def _check_pre(B: int, C: int, n: int):
    if B == 0 or C == 0:
        raise PreconditionError("zero", "B and C must be nonzero")
    if n < 3 or n % 2 == 0:
        raise PreconditionError("bad-n", "n must be odd and >= 3")
    sq = squarefree_split(B)
    if sq.B0 == -1:
        raise PreconditionError("square", "-B is a perfect square; decided by [sqrt(-B):1:0]")
    if math.gcd(sq.f, C) != 1:
        raise PreconditionError("gcd", "gcd(f, C) must be 1; reduce with the cascade first")
    return sq


def factor_C_over_K(B0: int, f: int, C: int, n: int, tilde: bool = False) -> CFactorization:
    """Split the support of C by the behaviour of its primes in Q(sqrt(-B0))."""
    if B0 == -1:
        raise PreconditionError("square", "B0 = -1 is handled upstream")
    if math.gcd(f, C) != 1:
        raise PreconditionError("gcd", "gcd(f, C) must be 1")
    dK = field_discriminant(B0)
    ell = valuation(C, 2)
    fac = CFactorization(ell, [], [], [])
    for p, e in factorize(C).factors:
        if tilde and p == 2:
            continue
        kind = splitting(dK, p)
        if kind is SplittingType.SPLIT:
            fac.split_part.append((p, e))
        elif kind is SplittingType.RAMIFIED:
            fac.ramified_part.append((p, e))
            if e >= 2 and fac.obstruction is None:
                fac.obstruction, fac.obstruction_prime = "ramified-square", p
        else:
            fac.inert_primes.append(p)
            if fac.obstruction is None:
                fac.obstruction, fac.obstruction_prime = "inert", p
    if tilde and B0 % 8 == 3 and ell != 2 and fac.obstruction is None:
        fac.obstruction, fac.obstruction_prime = "tilde-2-adic", 2
    return fac


def _mod_n_reduce(v, divs, n):
    # image of a class vector in Cl / n Cl
    return tuple(x % math.gcd(n, d) for x, d in zip(v, divs))


def _reachable(G, vectors: list[tuple[int, ...]], n: int, mods: list[int]):
    """All sign sums sum(+-v_i) in Cl/nCl, each with one sign pattern realizing it."""
    reach = {tuple(0 for _ in mods): ()}
    count = 1
    for v in vectors:
        nxt = {}
        for w, pat in reach.items():
            for s in (1, -1):
                u = tuple((a + s * b) % m for a, b, m in zip(w, v, mods))
                if u not in nxt:
                    nxt[u] = pat + (s,)
        reach = nxt
        count = len(reach)
        if count > MAX_PATTERNS:
            raise RuntimeError("too many sign patterns")
    return reach


def _split_vectors(G, D: int, split_part):
    vecs = []
    for p, e in split_part:
        P = prime_form(D, p)
        vecs.append(tuple((e * x) % d for x, d in zip(G.dlog(P), G.elementary_divisors)))
    return vecs


def decide_star0(B: int, C: int, n: int, M: int = 1) -> GlobalVerdict:
    """Is there a primitive point with u not divisible by any rational prime?

    M (coprimality of z) does not affect the answer."""
    sq = _check_pre(B, C, n)
    if is_square(-B):
        raise PreconditionError("square", "-B is a perfect square")
    C = abs(C)
    B0, f = sq.B0, sq.f
    order = order_for(B0, f, C)
    if B0 % 4 == 3 and C % 2 == 0:
        return GlobalVerdict(False, "B0=3 mod 4 and C even",
                             GlobalCertificate(order, {}, None, False, "even-C"))
    fac = factor_C_over_K(B0, f, C, n)
    if not fac.ok:
        return GlobalVerdict(False, f"obstruction:{fac.obstruction}:{fac.obstruction_prime}",
                             GlobalCertificate(order, {}, None, False, fac.obstruction), fac)
    G = class_group(order.disc)
    mods = [math.gcd(n, d) for d in G.elementary_divisors]
    vecs = _split_vectors(G, order.disc, fac.split_part)
    reach = _reachable(G, vecs, n, mods)
    zero = tuple(0 for _ in mods)
    ok = zero in reach
    jvec = None
    if ok:
        pat = reach[zero]
        jvec = _combine(vecs, pat, G.elementary_divisors)
    elif vecs:
        jvec = _combine(vecs, (1,) * len(vecs), G.elementary_divisors)
    else:
        jvec = zero
    cert = GlobalCertificate(order, G.summary(), jvec, ok, "star0")
    return GlobalVerdict(ok, "class-in-nCl" if ok else "class-not-in-nCl", cert, fac)


def _combine(vecs, pat, divs):
    out = [0] * len(divs)
    for v, s in zip(vecs, pat):
        out = [(a + s * b) % d for a, b, d in zip(out, v, divs)]
    return tuple(out)


def tilde_M_allowed(B0: int, C: int, M: int) -> bool:
    """Whether M lies in the set of z-moduli covered by the tilde criterion.

    Odd C forces z even on tilde points (4 divides N(u) = C z^n), so an even M
    can never be met there; B0 = 7 mod 8 with 2 || C or 4 || C also needs M odd."""
    if M % 2:
        return True
    if C % 2:
        return False
    if B0 % 8 == 7 and C % 8 != 0:
        return False
    return True


def decide_star0_tilde(B: int, C: int, n: int, M: int = 1) -> GlobalVerdict:
    """Points with 2 || u and x odd (needs B0 = 3 mod 4)."""
    sq = _check_pre(B, C, n)
    C = abs(C)
    B0, f = sq.B0, sq.f
    if B0 % 4 != 3:
        raise PreconditionError("tilde-B0", "tilde points need B0 = 3 mod 4")
    if not tilde_M_allowed(B0, C, M):
        raise PreconditionError("tilde-M", f"M = {M} is outside the admissible set for this (B, C)")
    order = order_for(B0, f, C)
    fac = factor_C_over_K(B0, f, C, n, tilde=True)
    if not fac.ok:
        return GlobalVerdict(False, f"obstruction:{fac.obstruction}:{fac.obstruction_prime}",
                             GlobalCertificate(order, {}, None, False, fac.obstruction), fac)
    if f % 2 == 0:
        # u/2 integral with x odd needs the 2-part of f trivial
        return GlobalVerdict(False, "f even", GlobalCertificate(order, {}, None, False, "f-even"), fac)
    G = class_group(order.disc)
    mods = [math.gcd(n, d) for d in G.elementary_divisors]
    vecs = _split_vectors(G, order.disc, fac.split_part)
    reach = _reachable(G, vecs, n, mods)
    if B0 % 8 == 3:
        # ell = 2 and the 2-part contributes the trivial class
        targets = [tuple(0 for _ in mods)]
        clause = "tilde, B0=3 mod 8"
    else:
        P2 = prime_form(order.disc, 2)
        e = 2 - fac.ell
        t = tuple((e * x) % d for x, d in zip(G.dlog(P2), G.elementary_divisors))
        targets = [tuple(x % m for x, m in zip(t, mods)), tuple((-x) % m for x, m in zip(t, mods))]
        clause = "tilde, B0=7 mod 8"
    ok = False
    jvec = None
    target = targets[0]
    for tv in targets:
        if tv in reach:
            ok = True
            target = tv
            jvec = _combine(vecs, reach[tv], G.elementary_divisors)
            break
    if jvec is None:
        jvec = _combine(vecs, (1,) * len(vecs), G.elementary_divisors)
    reason = "class-in-target" if ok else "class-not-in-target"
    if ok and B0 % 8 == 3 and not _generator_off_suborder(order.disc, fac.split_part, n):
        ok = False
        reason = "generators-in-suborder"
        clause += ", suborder refinement"
    cert = GlobalCertificate(order, G.summary(), jvec, ok, clause, target)
    return GlobalVerdict(ok, reason, cert, fac)


def _generator_off_suborder(D: int, split_part, n: int) -> bool:
    """For B0 = 3 mod 8: can a principal (j+ r) z^n have a generator outside Z[f sqrt(-B0)]?

    A tilde point is a generator u/2 of such an ideal that is not in the
    suborder of conductor 2f. If some unit is missing from the suborder, the
    unit multiples of u/2 run through all nonzero residues of F_4 and one
    always escapes. Otherwise every generator lies in the suborder exactly
    when the contracted ideal is principal there, so we need a class of
    j+ z^n in Cl(4D) that dies in Cl(D) without being principal itself. The
    kernel has order 3, so this only bites when 3 divides n."""
    if unit_index(D, 2) != 1:
        return True
    G1, G2 = class_group(D), class_group(4 * D)
    divs2 = G2.elementary_divisors
    mods2 = [math.gcd(n, d) for d in divs2]
    images = [G1.dlog(extend_to_overorder(g)) for g in G2.generators]
    H1, H2 = principal_classes(G1), principal_classes(G2)
    reach = _reachable(G2, _split_vectors(G2, 4 * D, split_part), n, mods2)
    steps = [range(0, d, m) for d, m in zip(divs2, mods2)]
    for rho in reach:
        for off in itertools.product(*steps):
            v = tuple((r + o) % d for r, o, d in zip(rho, off, divs2))
            img = [0] * len(G1.elementary_divisors)
            for x, im in zip(v, images):
                img = [(a + x * b) % d for a, b, d in zip(img, im, G1.elementary_divisors)]
            if tuple(img) in H1 and v not in H2:
                return True
    return False
