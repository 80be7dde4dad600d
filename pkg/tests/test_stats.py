import csv
from fractions import Fraction

import pytest

from gfermat.arith import Instance, factorize
from gfermat.cascade import Status
from gfermat.local import density_factor_2
from gfermat.oracle import SearchBound, local_solvable_exhaustive, search_primitive
from gfermat.qforms import ResourceError
from gfermat.stats import density_product, kappa1, kappa2, kappa2_euler_factor, sweep


def test_kappa1_enclosure():
    e = kappa1(50000)
    assert e.within("0.4581814", "0.4581819")
    assert kappa1(1000).contains(e)
    assert kappa1(100).upper - kappa1(100).lower < Fraction(1, 1000)


def test_kappa2_enclosure():
    e = kappa2(50000)
    assert e.within("0.526859", "0.526861")
    assert kappa2(1000).contains(e)
    assert kappa2(100).contains(kappa2(1000))


def test_kappa2_factor_at_2():
    assert kappa2_euler_factor(2) == 1 - Fraction(1, 4) - Fraction(1, 8) * Fraction(1, 2) * Fraction(4, 5)


def test_truncation_checked():
    with pytest.raises(ValueError):
        kappa1(50)


def test_density_product():
    assert density_product(3, 3) == density_factor_2(3) * Fraction(2597, 2880)
    a, b = density_product(3, 50), density_product(3, 200)
    assert b < a
    assert density_product(3, 1000) < Fraction(1, 2)


def test_local_sweep_matches_lifting_recount():
    T = 30
    count = 0
    for B in range(-T + 1, T):
        for C in range(-T + 1, T):
            if B and C:
                inst = Instance(B, C, 3)
                ps = {2} | set(factorize(C).primes())
                count += all(local_solvable_exhaustive(inst, p) for p in sorted(ps))
    r = sweep(3, T, "local")
    assert r.locally_soluble == count
    assert r.partition_ok() and r.total_pairs == (2 * T - 2) ** 2


def test_sign_symmetry_by_recount():
    T = 200
    r = sweep(3, T, "local")
    from gfermat.local import LocalTable
    Bs = [b for b in range(-T + 1, T) if b]
    t = LocalTable(Bs, 3)
    pos = sum(int(t.mask(C).sum()) for C in range(1, T))
    neg = sum(int(t.mask(-C).sum()) for C in range(1, T))
    assert pos == neg and pos + neg == r.locally_soluble


def test_caps():
    with pytest.raises(ResourceError):
        sweep(3, 10**4 + 1, "global")
    with pytest.raises(ValueError):
        sweep(4, 10, "local")


def test_global_sweep_csv_and_soundness(tmp_path):
    out = tmp_path / "g.csv"
    r = sweep(3, 15, "global", out=str(out))
    assert r.partition_ok()
    raw = out.read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.DictReader(out.open(encoding="utf-8")))
    assert list(rows[0]) == ["B", "C", "local", "verdict", "witness"]
    assert len(rows) == r.total_pairs
    for row in rows:
        B, C = int(row["B"]), int(row["C"])
        if row["verdict"] == Status.UNSOLVABLE.value:
            assert not search_primitive(Instance(B, C, 3), SearchBound(z_max=30, y_max=300), limit=1)


def test_global_sweep_deterministic_across_workers(tmp_path):
    a = sweep(3, 12, "global", out=str(tmp_path / "a.csv"))
    b = sweep(3, 12, "global", out=str(tmp_path / "b.csv"), threads=2)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.decided_solvable == b.decided_solvable
