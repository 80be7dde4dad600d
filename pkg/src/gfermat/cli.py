"""Command-line front end.

Exit status: 0 for a decided verdict or a finished report, 2 for Undecided,
1 for usage and resource errors. With --json a single envelope is written to
standard output; every integer in it is a decimal string."""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from . import __version__
from .arith import Instance, is_prime
from .cascade import Status, decide
from .globalcrit import PreconditionError, decide_star0, decide_star0_tilde
from .local import everywhere_locally_solvable, local_solvable_at, relevant_primes
from .oracle import PointFilter, SearchBound, search_primitive
from .qforms import ResourceError, check_discriminant, class_group, reduced_forms

SCHEMA_VERSION = "1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def jsonable(obj):
    """Integers become decimal strings, Fractions 'p/q', tuples lists."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _instance(args) -> Instance:
    if args.B == 0:
        raise UsageError("B must be nonzero")
    if args.C == 0:
        raise UsageError("C must be nonzero")
    if args.n < 3 or args.n % 2 == 0:
        raise UsageError("n must be odd and >= 3")
    return Instance(args.B, args.C, args.n)


def _local_dict(v) -> dict:
    return {"p": v.p, "k": v.k, "ell": v.ell, "solvable": v.solvable, "case_label": v.case_label}


def _bound_dict(b: SearchBound | None):
    if b is None:
        return None
    return {"z_max": b.z_max, "y_max": b.y_max, "x_max": b.x_max}


# ------------------------------------------------------------ subcommands

def cmd_solve(args):
    inst = _instance(args)
    bound = SearchBound(z_max=args.bound, y_max=args.ymax)
    v = decide(inst.B, inst.C, inst.n, bound, want_witness=True, trace=args.trace)
    res = {
        "status": v.status.value,
        "reason": v.reason,
        "witness": list(v.witness) if v.witness else None,
        "certificate": v.certificate,
        "open_nodes": [o.as_dict() for o in v.open_nodes],
        "local_failure": _local_dict(v.local_failure) if v.local_failure else None,
        "excluded_prime": v.excluded_prime,
        "search_bound": _bound_dict(v.search_bound),
    }
    if args.trace:
        res["trace"] = v.trace
    lines = [f"x^2 + ({inst.B}) y^2 = ({inst.C}) z^{inst.n}: {v.status.value} ({v.reason})"]
    if v.witness:
        lines.append(f"  witness (x, y, z) = {tuple(v.witness)}")
    for o in v.open_nodes:
        lines.append(f"  open node B={o.node.Bp} C={o.node.Cp} part={o.part} "
                     f"undischarged y-primes={list(o.undischarged)}")
    if v.local_failure:
        lf = v.local_failure
        lines.append(f"  fails at p={lf.p} (k={lf.k}, ell={lf.ell}, clause {lf.case_label})")
    code = 2 if v.status is Status.UNDECIDED else 0
    return res, lines, code


def cmd_local(args):
    inst = _instance(args)
    if args.p is not None:
        if not is_prime(args.p):
            raise UsageError("p must be prime")
        v = local_solvable_at(inst, args.p)
        res = {"everywhere": None, "verdicts": [_local_dict(v)], "failing": None if v.solvable else _local_dict(v)}
    else:
        ok, bad = everywhere_locally_solvable(inst)
        vs = [local_solvable_at(inst, p) for p in relevant_primes(inst)]
        res = {"everywhere": ok, "verdicts": [_local_dict(v) for v in vs],
               "failing": _local_dict(bad) if bad else None}
    lines = ["  p   k  ell  solvable  clause"]
    for v in res["verdicts"]:
        lines.append(f"{v['p']:>3} {v['k']:>3} {v['ell']:>4}  {str(v['solvable']):<8}  {v['case_label']}")
    if res["everywhere"] is not None:
        lines.append(f"everywhere locally solvable: {res['everywhere']}")
    return res, lines, 0


def cmd_global(args):
    inst = _instance(args)
    fn = decide_star0_tilde if args.tilde else decide_star0
    v = fn(inst.B, inst.C, inst.n, args.M)
    fac = v.factorization
    res = {
        "part": "tilde" if args.tilde else "star0",
        "solvable": v.solvable,
        "reason": v.reason,
        "certificate": v.certificate.as_dict() if v.certificate else None,
        "factorization": None if fac is None else {
            "ell": fac.ell, "ramified_part": fac.ramified_part, "split_part": fac.split_part,
            "inert_primes": fac.inert_primes, "obstruction": fac.obstruction,
            "obstruction_prime": fac.obstruction_prime},
    }
    lines = [f"{res['part']}: {'Solvable' if v.solvable else 'Unsolvable'} ({v.reason})"]
    if v.certificate:
        c = v.certificate
        lines.append(f"  order {c.order.case}, disc {c.order.disc}, clause {c.clause}")
        if c.class_group:
            lines.append(f"  Cl = {c.class_group.get('elementary_divisors')}, [j+] = {c.j_plus_class_vector}")
    return res, lines, 0


def _parse_filter(items) -> PointFilter:
    kw = {"star0": (), "tilde0": False, "y_coprime": (), "z_coprime": ()}
    names = {"star0": "star0", "ycoprime": "y_coprime", "zcoprime": "z_coprime"}
    for it in items or []:
        if it == "tilde0":
            kw["tilde0"] = True
            continue
        key, _, vals = it.partition("=")
        if key not in names or not vals:
            raise UsageError(f"bad filter '{it}'; use star0=P,.. ycoprime=P,.. zcoprime=P,.. or tilde0")
        try:
            ps = tuple(int(v) for v in vals.split(","))
        except ValueError:
            raise UsageError(f"bad filter '{it}': primes must be integers") from None
        kw[names[key]] = kw[names[key]] + ps
    return PointFilter(**kw)


def cmd_oracle(args):
    inst = _instance(args)
    flt = _parse_filter(args.filter)
    bound = SearchBound(z_max=args.zmax, y_max=args.ymax, x_max=args.xmax, filter=flt)
    hits = search_primitive(inst, bound, limit=args.limit)
    res = {"hits": [list(h) for h in hits], "count": len(hits), "search_bound": _bound_dict(bound)}
    lines = [json.dumps({"x": str(x), "y": str(y), "z": str(z)}) for x, y, z in hits]
    return res, lines, 0


def cmd_classgroup(args):
    try:
        D = check_discriminant(args.D)
    except ValueError as e:
        raise UsageError(str(e)) from None
    G = class_group(D)
    forms = [tuple(f) for f in reduced_forms(D)]
    res = dict(G.summary())
    res["reduced_forms"] = forms
    divs = " x ".join(f"Z/{d}" for d in G.elementary_divisors) or "trivial"
    lines = [f"D = {D}: h = {G.h}, Cl = {divs}"]
    for g in G.generators:
        lines.append(f"  generator {tuple(g)} of order {G.order_of(g)}")
    return res, lines, 0


def cmd_stats_sweep(args):
    from .stats import sweep

    if args.n < 3 or args.n % 2 == 0:
        raise UsageError("n must be odd and >= 3")
    bound = SearchBound(z_max=args.bound, y_max=args.ymax) if args.mode == "global" else None
    r = sweep(args.n, args.T, args.mode, bound=bound, out=args.out, threads=args.threads)
    res = r.as_dict()
    elapsed = res.pop("elapsed")
    lines = [f"n={r.n} T={r.T} mode={r.mode}: pairs={r.total_pairs} local={r.locally_soluble} "
             f"solvable={r.decided_solvable} unsolvable={r.decided_unsolvable} undecided={r.undecided}"]
    if r.mode == "global" and r.locally_soluble:
        lines.append(f"  decided_solvable / locally_soluble = {r.decided_solvable / r.locally_soluble:.5f}")
    return res, lines, 0, {"sweep_seconds": round(elapsed, 3)}


def cmd_stats_constants(args):
    from .stats import kappa1, kappa2

    out = [kappa1(args.X), kappa2(args.X)]
    res = {"constants": [e.as_dict() for e in out]}
    lines = [f"{e.name}: [{e.as_dict()['lower_decimal']}, {e.as_dict()['upper_decimal']}] (X = {e.X})" for e in out]
    return res, lines, 0


# ------------------------------------------------------------------ parser

def _add_instance(p):
    p.add_argument("B", type=int)
    p.add_argument("C", type=int)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--json", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gfermat", description="Primitive solutions of x^2 + B y^2 = C z^n.")
    ap.add_argument("--version", action="version", version=f"gfermat {__version__}")
    ap.add_argument("--timings", action="store_true", help="include wall-clock timings in the envelope")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("solve", help="full decision with cascade and oracle fallback")
    _add_instance(p)
    p.add_argument("--bound", type=int, default=200, help="oracle z bound")
    p.add_argument("--ymax", type=int, default=10**5)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("local", help="p-adic solubility")
    _add_instance(p)
    p.add_argument("--p", type=int)
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("global", help="class-group test for star-0 or tilde points")
    _add_instance(p)
    p.add_argument("--tilde", action="store_true")
    p.add_argument("--M", type=int, default=1)
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("oracle", help="bounded search for primitive solutions")
    _add_instance(p)
    p.add_argument("--zmax", type=int, default=50)
    p.add_argument("--ymax", type=int, default=10**5)
    p.add_argument("--xmax", type=int)
    p.add_argument("--limit", type=int)
    p.add_argument("--filter", action="append",
                   help="star0=P,.. | ycoprime=P,.. | zcoprime=P,.. | tilde0 (repeatable)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("classgroup", help="structure of the form class group of discriminant D")
    p.add_argument("D", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_classgroup)

    st = sub.add_parser("stats", help="counting experiments and constants")
    ss = st.add_subparsers(dest="stats_command", parser_class=_Parser)
    ss.required = True
    p = ss.add_parser("sweep")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--mode", choices=("local", "global"), default="local")
    p.add_argument("--out")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--bound", type=int, default=40)
    p.add_argument("--ymax", type=int, default=2000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats_sweep)
    p = ss.add_parser("constants")
    p.add_argument("--X", type=int, default=50000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats_constants)
    return ap


def _echo(args) -> dict:
    skip = {"func", "json", "timings", "command", "stats_command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        return 1
    command = args.command if args.command != "stats" else f"stats {args.stats_command}"
    t0 = time.perf_counter()
    try:
        got = args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        return 1
    except PreconditionError as e:
        print(f"precondition {e.code}: {e}", file=err)
        return 1
    except ResourceError as e:
        print(f"resource error: {e}", file=err)
        return 1
    except ValueError as e:
        print(f"usage error: {e}", file=err)
        return 1
    res, lines, code = got[:3]
    timings = dict(got[3]) if len(got) > 3 else {}
    timings["total_seconds"] = round(time.perf_counter() - t0, 3)
    if getattr(args, "json", False):
        env = {"schema_version": SCHEMA_VERSION, "command": command, "input": jsonable(_echo(args)),
               "result": jsonable(res), "timings": timings if args.timings else {}}
        out.write(json.dumps(env, sort_keys=True) + "\n")
    else:
        for line in lines:
            out.write(line + "\n")
        if args.timings:
            out.write(f"time: {timings['total_seconds']} s\n")
    return code


def main(argv=None) -> int:
    sys.exit(run(argv))


def load_schema(command: str) -> dict:
    """The JSON schema shipped for a subcommand ('solve', 'stats sweep', ...)."""
    from importlib.resources import files

    name = command.replace(" ", "-") + ".schema.json"
    return json.loads(files("gfermat").joinpath("schemas", name).read_text(encoding="utf-8"))
