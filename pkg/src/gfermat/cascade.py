"""Full decision procedure for primitive solutions of x^2 + B y^2 = C z^n.

Pairs sharing a square are stripped first. The point set is then cut by the
exact level t of u = x + f sqrt(-B0) y at each prime of f C, and each piece
is carried to a pair (B', C') whose points satisfy the star-0 condition at
that prime. Once gcd(f', C') = 1, the class-group criterion decides the star-0
(or tilde) part. Primes are handled in ascending order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .arith import (Instance, check_point, factorize, is_square,
                    is_squarefree, squarefree_split, valuation)
from .globalcrit import (GlobalVerdict, PreconditionError, decide_star0,
                         decide_star0_tilde, tilde_M_allowed)
from .local import LocalVerdict, everywhere_locally_solvable
from .oracle import PointFilter, SearchBound, search_primitive
from .qforms import ResourceError

MAX_NODES = 20000


class Status(str, Enum):
    SOLVABLE = "Solvable"
    UNSOLVABLE = "Unsolvable"
    UNDECIDED = "Undecided"


@dataclass(frozen=True)
class StarCondition:
    p: int
    kind: str = "star"   # or "tildestar" (p = 2 only)
    t: int = 0


@dataclass(frozen=True)
class TrailStep:
    lemma: str
    p: int
    t: int
    source: tuple[int, int]
    mult: tuple[int, int, int]   # a point (x, y, z) of the target gives (mx x, my y, mz z)

    def as_dict(self) -> dict:
        return {"lemma": self.lemma, "p": self.p, "t": self.t,
                "source": list(self.source), "multipliers": list(self.mult)}


@dataclass(frozen=True)
class CascadeNode:
    Bp: int
    Cp: int
    star_conditions: tuple[StarCondition, ...] = ()
    y_coprime: frozenset = frozenset()
    z_coprime: frozenset = frozenset()
    trail: tuple[TrailStep, ...] = ()

    @property
    def M(self) -> int:
        return math.prod(self.z_coprime)

    def condition_at(self, p: int) -> str | None:
        for c in self.star_conditions:
            if c.p == p:
                return c.kind
        return None

    def key(self):
        return (self.Bp, self.Cp, tuple(sorted(self.y_coprime)), tuple(sorted(self.z_coprime)))

    def lift(self, pt: tuple[int, int, int]) -> tuple[int, int, int]:
        x, y, z = pt
        for step in reversed(self.trail):
            mx, my, mz = step.mult
            x, y, z = mx * x, my * y, mz * z
        return x, y, z

    def point_filter(self, part: str) -> PointFilter:
        odd = tuple(sorted(c.p for c in self.star_conditions if c.p != 2 and c.kind == "star"))
        if part == "tilde":
            return PointFilter(star0=odd, tilde0=True,
                               y_coprime=tuple(sorted(self.y_coprime)),
                               z_coprime=tuple(sorted(self.z_coprime)))
        star = tuple(sorted(c.p for c in self.star_conditions if c.kind == "star"))
        return PointFilter(star0=star, y_coprime=tuple(sorted(self.y_coprime)),
                           z_coprime=tuple(sorted(self.z_coprime)))

    def as_dict(self) -> dict:
        return {
            "B": self.Bp, "C": self.Cp,
            "star_conditions": [{"p": c.p, "kind": c.kind, "t": c.t} for c in self.star_conditions],
            "y_coprime": sorted(self.y_coprime),
            "z_coprime": sorted(self.z_coprime),
            "trail": [s.as_dict() for s in self.trail],
        }


@dataclass
class OpenNode:
    node: CascadeNode
    part: str            # "star0" or "tilde"
    undischarged: tuple[int, ...]

    def as_dict(self) -> dict:
        d = self.node.as_dict()
        d["part"] = self.part
        d["undischarged_y_primes"] = list(self.undischarged)
        return d


@dataclass
class Verdict:
    status: Status
    reason: str
    witness: tuple[int, int, int] | None = None
    certificate: dict | None = None
    open_nodes: list[OpenNode] = field(default_factory=list)
    local_failure: LocalVerdict | None = None
    excluded_prime: int | None = None
    search_bound: SearchBound | None = None
    trace: list[dict] = field(default_factory=list)


# ------------------------------------------------------------------ helpers

def _ceil(a: int, b: int) -> int:
    return -(-a // b)


def strip_common_squares(B: int, C: int) -> tuple[int, int, int]:
    """Divide (B, C) by (p^2, p^2) while p^2 | gcd(B, C); returns (B', C', count)."""
    if B == 0 or C == 0:
        raise ValueError("B and C must be nonzero")
    B, C, steps = _strip_steps(B, C)
    return B, C, len(steps)


def _strip_steps(B: int, C: int) -> tuple[int, int, list[TrailStep]]:
    steps = []
    g = math.gcd(B, C)
    for p, _ in factorize(g).factors:
        while B % (p * p) == 0 and C % (p * p) == 0:
            steps.append(TrailStep("square-strip", p, 1, (B, C), (p, 1, 1)))
            B //= p * p
            C //= p * p
    return B, C, steps


def _prime_factors(n: int) -> list[int]:
    return factorize(n).primes() if abs(n) > 1 else []


def in_excluded_set(B: int, C: int, n: int) -> tuple[bool, int | None]:
    """Membership in the set of pairs with deep interaction of f and C at some p | n."""
    f = squarefree_split(B).f
    for p in _prime_factors(n):
        vf = valuation(f, p)
        vc = valuation(C, p)
        twice = 2 * vf - vc          # twice v_p(f) - v_p(C)/2
        if twice <= 0:
            continue
        if (vc % 2 == 0 and twice >= 2 * n) or (vc % 2 == 1 and twice >= n + 1):
            return True, p
    return False, None


@dataclass(frozen=True)
class Transition:
    t: int
    tilde: bool            # the piece is the tilde part at 2
    lemma: str
    mult: tuple[int, int, int]
    Bp: int
    Cp: int
    y_flag: bool
    z_flag: bool


def _transitions(B: int, C: int, n: int, p: int) -> list[Transition]:
    """Nonempty pieces of the point set split by the level of u at p."""
    f = squarefree_split(B).f
    r = valuation(f, p)
    v = valuation(C, p)
    out: list[Transition] = []

    def add(t, tilde, lemma, a, b, e, yf, zf):
        # x = p^a x', y = p^b y', z = p^e z'
        Bp = B * p ** (2 * b) // p ** (2 * a)
        num = C * p ** (n * e)
        den = p ** (2 * a)
        if num % den:
            raise AssertionError("non-integral cascade target")
        out.append(Transition(t, tilde, lemma, (p**a, p**b, p**e), Bp, num // den, yf, zf))

    if r and v:
        if v != 1:
            raise ValueError(f"p = {p} divides f and p^2 | C; strip common squares first")
        if p != 2:
            for t in range(1, r + 1):
                if (2 * t - 1) % n == 0:
                    add(t, False, "L-fC-odd", t, 0, (2 * t - 1) // n, True, False)
                elif t == r:
                    add(t, False, "L-fC-odd", r, 0, _ceil(2 * r - 1, n), False, False)
        else:
            for t in range(1, r + 1):
                if (2 * t - 1) % n == 0:
                    add(t, False, "L-fC-2", t, 0, (2 * t - 1) // n, True, False)
                elif t == r:
                    add(t, False, "L-fC-2", r, 0, _ceil(2 * r - 1, n), False, False)
            add(r + 1, True, "L-fC-2", r, 0, _ceil(2 * r - 1, n), False, False)
    elif r:
        lemma = "L-cascade_f" if p != 2 else "L-cascade_f_2"
        add(0, False, lemma, 0, 0, 0, False, False)
        for t in range(1, r + 1):
            if t % n == 0:
                add(t, False, lemma, t, 0, 2 * t // n, True, False)
            elif t == r:
                add(t, False, lemma, r, 0, _ceil(2 * r, n), False, False)
        if p == 2:
            add(r + 1, True, lemma, r, 0, _ceil(2 * r, n), False, False)
    elif v:
        if p != 2:
            add(0, False, "L-cascade_y", 0, 0, 0, False, False)
            for t in range(1, v // 2 + 1):
                add(t, False, "L-cascade_y", t, t, 0, False, True)
        else:
            add(0, False, "L-cascade_y_2", 0, 0, 0, False, False)
            for t in range(1, v // 2 + 2):
                add(t, True, "L-cascade_y_2", t - 1, t - 1, 0, False, t >= 2)
                if t <= v // 2:
                    add(t, False, "L-cascade_y_2", t, t, 0, False, True)
    else:
        add(0, False, "Obs-p∤y", 0, 0, 0, False, False)
    # tilde piece first at each level keeps the order stable: (t, tilde desc)
    out.sort(key=lambda tr: (tr.t, not tr.tilde))
    return out


def enumerate_star_levels(B: int, C: int, n: int, p: int) -> list[tuple[int, bool]]:
    """Levels t with a possibly nonempty piece, as (t, is_tilde_piece) pairs."""
    return [(tr.t, tr.tilde) for tr in _transitions(B, C, n, p)]


def apply_cascade_step(node: CascadeNode, p: int, t: int, n: int, tilde: bool = False) -> CascadeNode:
    for tr in _transitions(node.Bp, node.Cp, n, p):
        if tr.t == t and tr.tilde == tilde:
            return _child(node, p, tr)
    raise ValueError(f"level t={t}{' (tilde)' if tilde else ''} at p={p} is empty for ({node.Bp}, {node.Cp})")


def _child(node: CascadeNode, p: int, tr: Transition) -> CascadeNode:
    cond = StarCondition(p, "tildestar" if tr.tilde else "star", 0)
    conds = tuple(sorted((c for c in node.star_conditions if c.p != p), key=lambda c: c.p)) + (cond,)
    conds = tuple(sorted(conds, key=lambda c: c.p))
    step = TrailStep(tr.lemma, p, tr.t, (node.Bp, node.Cp), tr.mult)
    return CascadeNode(tr.Bp, tr.Cp, conds,
                       node.y_coprime | ({p} if tr.y_flag else set()),
                       node.z_coprime | ({p} if tr.z_flag else set()),
                       node.trail + (step,))


def discharge_y_constraints(node: CascadeNode, n: int, part: str = "star0") -> tuple[int, ...]:
    """Primes of y_coprime that no known result removes; empty means free.

    p is free when p | C' and p does not divide f' (such a p cannot divide y
    on star-0 points), when gcd(p, n C') = 1, or for p = 2 on the tilde part."""
    f = squarefree_split(node.Bp).f
    left = []
    for p in sorted(node.y_coprime):
        if part == "tilde" and p == 2:
            continue
        if node.Cp % p == 0 and f % p:
            continue
        if math.gcd(p, n * node.Cp) == 1:
            continue
        left.append(p)
    return tuple(left)


def reduce_general_A(A: int, B: int, C: int, n: int = 3) -> Instance:
    """Instance for A x^2 + B y^2 = C z^n with squarefree A: (A B, A C)."""
    if A == 0:
        raise ValueError("A must be nonzero")
    if not is_squarefree(A):
        raise NotImplementedError("A with a square factor is not supported")
    return Instance(A * B, A * C, n)


# ------------------------------------------------------------------ driver

@dataclass
class _Part:
    name: str
    verdict: GlobalVerdict | None
    solvable: bool
    undischarged: tuple[int, ...] = ()
    note: str = ""


def _evaluate(node: CascadeNode, n: int) -> list[_Part]:
    sq = squarefree_split(node.Bp)
    at2 = node.condition_at(2)
    parts = []
    if at2 != "tildestar":
        gv = decide_star0(node.Bp, node.Cp, n, node.M)
        und = discharge_y_constraints(node, n, "star0") if gv.solvable else ()
        parts.append(_Part("star0", gv, gv.solvable, und))
    if sq.B0 % 4 == 3 and at2 != "star":
        if 2 in node.z_coprime and not tilde_M_allowed(sq.B0, abs(node.Cp), node.M):
            # x, y odd force 8 | x^2 + B y^2 (B0 = 7 mod 8) or 4 || it (B0 = 3 mod 8),
            # so z odd is impossible here
            parts.append(_Part("tilde", None, False, note="z parity"))
        else:
            gv = decide_star0_tilde(node.Bp, node.Cp, n, node.M)
            und = discharge_y_constraints(node, n, "tilde") if gv.solvable else ()
            parts.append(_Part("tilde", gv, gv.solvable, und))
    return parts


class _Search:
    def __init__(self, n: int):
        self.n = n
        self.count = 0
        self.open: list[OpenNode] = []
        self.open_keys: set = set()
        self.found: tuple[CascadeNode, _Part] | None = None
        self.certificate: dict | None = None

    def run(self, node: CascadeNode, depth: int, cap: int) -> dict:
        self.count += 1
        if self.count > MAX_NODES:
            raise ResourceError("cascade tree exceeds node cap")
        if depth > cap:
            raise AssertionError("cascade depth bound violated")
        rec = {"node": node.as_dict(), "children": []}
        f = squarefree_split(node.Bp).f
        shared = _prime_factors(math.gcd(f, node.Cp))
        if shared:
            p = shared[0]
            rec["branch_prime"] = p
            for tr in _transitions(node.Bp, node.Cp, self.n, p):
                rec["children"].append(self.run(_child(node, p, tr), depth + 1, cap))
                if self.found:
                    break
            if not rec["children"]:
                rec["status"] = "empty"
            return rec
        parts = _evaluate(node, self.n)
        rec["parts"] = [{"part": pt.name, "solvable": pt.solvable,
                         "reason": pt.verdict.reason if pt.verdict else pt.note,
                         "undischarged_y_primes": list(pt.undischarged)} for pt in parts]
        for pt in parts:
            if pt.solvable and not pt.undischarged:
                self.found = (node, pt)
                self.certificate = pt.verdict.certificate.as_dict() if pt.verdict.certificate else None
                rec["status"] = "solvable"
                return rec
        for pt in parts:
            if pt.solvable:
                k = node.key() + (pt.name,)
                if k not in self.open_keys:
                    self.open_keys.add(k)
                    self.open.append(OpenNode(node, pt.name, pt.undischarged))
        conditioned = {c.p for c in node.star_conditions}
        free = [p for p in _prime_factors(f * node.Cp) if p not in conditioned]
        if free:
            p = free[0]
            rec["branch_prime"] = p
            for tr in _transitions(node.Bp, node.Cp, self.n, p):
                rec["children"].append(self.run(_child(node, p, tr), depth + 1, cap))
                if self.found:
                    break
            rec["status"] = "branched"
        else:
            rec["status"] = "open" if any(pt.solvable for pt in parts) else "empty"
        return rec


def _find_witness(B, C, n, candidates, bound: SearchBound):
    """Oracle search on each (node, part); hits are lifted and re-verified."""
    for node, part in candidates:
        flt = node.point_filter(part)
        b = SearchBound(bound.z_max, bound.y_max, bound.x_max, flt)
        for pt in search_primitive(Instance(node.Bp, node.Cp, n), b, limit=1):
            w = node.lift(pt)
            if check_point(B, C, n, *w):
                return w
    return None


def decide(B: int, C: int, n: int, search_bound: SearchBound | None = None,
           want_witness: bool = True, trace: bool = False) -> Verdict:
    inst = Instance(B, C, n)
    bound = search_bound or SearchBound()
    if is_square(-B):
        r = math.isqrt(-B)
        return Verdict(Status.SOLVABLE, "minus-B-square", (r, 1, 0), search_bound=bound)
    ok, bad = everywhere_locally_solvable(inst)
    if not ok:
        return Verdict(Status.UNSOLVABLE, f"local-obstruction:p={bad.p}", local_failure=bad, search_bound=bound)
    excluded, ep = in_excluded_set(B, C, n)

    B1, C1, steps = _strip_steps(B, C)
    root = CascadeNode(B1, C1, (), frozenset(), frozenset(), tuple(steps))
    f1 = squarefree_split(B1).f
    cap = sum(valuation(B1, p) + valuation(C1, p) for p in _prime_factors(f1 * C1)) + 1
    s = _Search(n)
    tree = s.run(root, 0, cap)
    traces = [tree] if trace else []

    if s.found:
        node, pt = s.found
        w = None
        if want_witness:
            w = _find_witness(B, C, n, [(node, pt.name)], bound)
            if w is None:
                hits = search_primitive(inst, bound, limit=1)
                w = hits[0] if hits else None
        return Verdict(Status.SOLVABLE, "criterion", w, s.certificate, search_bound=bound, trace=traces)

    cands = [(o.node, o.part) for o in s.open]
    if s.open or excluded:
        w = _find_witness(B, C, n, cands, bound)
        if w is None:
            hits = search_primitive(inst, bound, limit=1)
            w = hits[0] if hits else None
        if w is not None:
            return Verdict(Status.SOLVABLE, "oracle-witness", w, open_nodes=s.open,
                           excluded_prime=ep, search_bound=bound, trace=traces)
        reason = "excluded-set" if excluded else "undischarged-y-constraint"
        return Verdict(Status.UNDECIDED, reason, open_nodes=s.open, excluded_prime=ep,
                       search_bound=bound, trace=traces)
    return Verdict(Status.UNSOLVABLE, "all-nodes-empty", search_bound=bound, trace=traces)
