import itertools
import random

import pytest

from maxsyn.cnf import CnfParseError, VarKind, WeightedCnf, parse_wcnf, read_wcnf, to_wcnf_text, write_wcnf
from maxsyn.weights import OMEGA, ExactW

from conftest import brute_force_count, random_formula


def models(f: WeightedCnf) -> list[tuple[bool, ...]]:
    out = []
    for bits in itertools.product((False, True), repeat=f.num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in f.clauses):
            out.append(bits)
    return out


def test_fresh_vars():
    f = WeightedCnf()
    assert f.fresh_vars(VarKind.STATE, 2) == [1, 2]
    assert f.fresh_vars(VarKind.AUX, 1) == [3]
    with pytest.raises(ValueError):
        f.fresh_vars(VarKind.SELECT, 0)
    assert f.kind(3) is VarKind.AUX


def test_iff_clauses():
    f = WeightedCnf()
    x, y = f.fresh_vars(VarKind.STATE, 2)
    f.add_iff(x, y)
    assert set(f.clauses) == {(-x, y), (x, -y)}
    assert models(f) == [(False, False), (True, True)]


def test_iff_and_clauses():
    f = WeightedCnf()
    r, q, qp = f.fresh_vars(VarKind.STATE, 3)
    f.add_iff_and(r, [q, qp])
    assert set(f.clauses) == {(-r, q), (-r, qp), (r, -q, -qp)}
    for bits in models(f):
        assert bits[0] == (bits[1] and bits[2])
    assert len(models(f)) == 4


def test_xor3():
    f = WeightedCnf()
    a, b, c = f.fresh_vars(VarKind.STATE, 3)
    f.add_xor3(a, b, c)
    assert f.num_clauses == 4
    ms = models(f)
    assert len(ms) == 4
    assert all(sum(m) % 2 == 0 for m in ms)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_exactly_one(k):
    f = WeightedCnf()
    vs = f.fresh_vars(VarKind.SELECT, k)
    f.add_exactly_one(vs)
    assert f.num_clauses == 1 + k * (k - 1) // 2
    ms = models(f)
    assert len(ms) == k
    assert all(sum(m) == 1 for m in ms)


def test_exactly_one_empty():
    with pytest.raises(ValueError):
        WeightedCnf().add_exactly_one([])


def test_only_aux_weighted():
    f = WeightedCnf()
    s = f.fresh_var(VarKind.STATE)
    with pytest.raises(ValueError):
        f.set_weight(s, OMEGA)


def test_clause_normalization():
    f = WeightedCnf()
    a, b = f.fresh_vars(VarKind.STATE, 2)
    f.add_clause((a, a, b))
    f.add_clause((a, -a))
    assert f.clauses == [(a, b)]
    with pytest.raises(ValueError):
        f.add_clause((3,))


def test_empty_formula_text():
    assert to_wcnf_text(WeightedCnf()) == "p wcnf 0 0\n"


def test_weight_line_rendering():
    f = WeightedCnf()
    f.fresh_vars(VarKind.STATE, 2)
    w = f.fresh_var(VarKind.AUX)
    f.set_weight(w, OMEGA)
    f.add_clause((w,))
    text = to_wcnf_text(f)
    assert "w 3 exact 0,1,0,0,0" in text.splitlines()
    assert "c kind 1 state" in text


def _same(f, g):
    assert f.kinds == g.kinds
    assert f.clauses == g.clauses
    assert f.weights == g.weights
    for lit, w in f.weights.items():
        assert type(g.weights[lit]) is type(w)


@pytest.mark.parametrize("exact", [True, False])
def test_round_trip_random(exact, tmp_path):
    rng = random.Random(7)
    f = random_formula(rng, 20, 100, nselect=4, exact=exact)
    g = parse_wcnf(to_wcnf_text(f))
    _same(f, g)
    path = tmp_path / "f.wcnf"
    write_wcnf(f, path)
    _same(f, read_wcnf(path))


def test_parse_errors_carry_line_numbers():
    with pytest.raises(CnfParseError) as e:
        parse_wcnf("p wcnf 2 1\nw 1 exact 1,2,3\n1 2 0\n")
    assert e.value.lineno == 2
    with pytest.raises(CnfParseError) as e:
        parse_wcnf("p wcnf 2 1\n1 x 0\n")
    assert e.value.lineno == 2
    with pytest.raises(CnfParseError):
        parse_wcnf("1 2 0\n")
    with pytest.raises(CnfParseError):
        parse_wcnf("p wcnf 2 2\n1 2 0\n")
    with pytest.raises(CnfParseError):
        parse_wcnf("p wcnf 2 1\nw 1 float 1.0\n1 0\n")


def test_one_sided_weight_defaults_other_polarity():
    f = parse_wcnf("p wcnf 1 0\nw 1 exact 0,1,0,0,0\n")
    assert f.weights[-1] == ExactW(1)


def test_conjoin_preserves_kind_partition():
    rng = random.Random(3)
    f = random_formula(rng, 6, 8, nselect=2)
    g = random_formula(rng, 5, 7, nselect=1)
    h = f.copy()
    shift = h.conjoin(g)
    assert shift == 6
    assert h.kinds == f.kinds + g.kinds
    assert h.select_vars == f.select_vars + [v + shift for v in g.select_vars]
    assert brute_force_count(h) == brute_force_count(f) * brute_force_count(g)
