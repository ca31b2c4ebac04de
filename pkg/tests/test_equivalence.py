import math
import random

import numpy as np
import pytest

from maxsyn.circuit import Circuit, parse_circuit
from maxsyn.encoder import Basis, EncodingError
from maxsyn.equivalence import EqEncoding, check_equiv, fidelity, fidelity_count, unit_paulis
from maxsyn.oracle import equal_up_to_phase, jamiolkowski_fidelity
from maxsyn.weights import ExactW

from conftest import random_pair

S = parse_circuit("S 0\n")
TT = parse_circuit("T 0\nLAYER\nT 0\n")
T = parse_circuit("T 0\n")
RZ8 = parse_circuit("RZ(pi/8) 0\n")

ALL_ENCODINGS = [
    (EqEncoding.LINEAR, Basis.PB),
    (EqEncoding.CYCLIC, Basis.CB),
    (EqEncoding.CYCLIC, Basis.PB),
    (EqEncoding.LINEAR_CYCLIC, Basis.PB),
]


def test_unit_paulis():
    assert unit_paulis(2) == ["XI", "ZI", "IX", "IZ"]


def test_s_vs_tt_linear_cyclic():
    v = check_equiv(S, TT, EqEncoding.LINEAR_CYCLIC, Basis.PB)
    assert v.raw == 2 and v.score == 1 and v.equivalent


def test_s_vs_tt_cyclic_cb():
    v = check_equiv(S, TT, EqEncoding.CYCLIC, Basis.CB)
    assert v.equivalent
    assert abs(complex(v.raw)) == pytest.approx(2)


def test_s_vs_t_linear_cyclic():
    v = check_equiv(S, T, EqEncoding.LINEAR_CYCLIC, Basis.PB)
    assert not v.equivalent
    assert v.score == pytest.approx((math.cos(math.pi / 4) + 1) / 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_identity_cyclic_pb(n):
    v = check_equiv(Circuit(n, []), Circuit(n, []), EqEncoding.CYCLIC, Basis.PB)
    assert v.raw == 4**n and v.equivalent


def test_linear_counts_are_one():
    v = check_equiv(S, TT, EqEncoding.LINEAR, Basis.PB)
    assert v.equivalent and v.score == 1 and v.raw == 2


def test_global_phase_note_cb():
    # S vs T.T differ by no phase; RZ(pi/4) vs T differ by e^{-i pi/8}
    assert not check_equiv(S, TT, EqEncoding.CYCLIC, Basis.CB).global_phase_note
    v = check_equiv(parse_circuit("RZ(pi/4) 0\n"), T, EqEncoding.CYCLIC, Basis.CB)
    assert v.equivalent and v.global_phase_note and not v.exact


def test_encoding_basis_mismatch():
    for enc in (EqEncoding.LINEAR, EqEncoding.LINEAR_CYCLIC):
        with pytest.raises(EncodingError):
            check_equiv(S, TT, enc, Basis.CB)


def test_width_mismatch():
    with pytest.raises(ValueError):
        check_equiv(S, Circuit(2, []), EqEncoding.CYCLIC, Basis.PB)


def test_unitary_operand():
    m = np.diag([1, 1j])
    assert check_equiv(m, TT, EqEncoding.CYCLIC, Basis.CB).equivalent
    assert not check_equiv(m, T, EqEncoding.CYCLIC, Basis.CB).equivalent


def test_encoding_parse():
    assert EqEncoding.parse("LC") is EqEncoding.LINEAR_CYCLIC
    assert EqEncoding.parse("linear-cyclic") is EqEncoding.LINEAR_CYCLIC
    assert EqEncoding.parse("cyclic") is EqEncoding.CYCLIC


def test_verdicts_agree_with_oracle():
    rng = random.Random(31)
    for k in range(30):
        n = rng.randint(1, 2)
        a, b = random_pair(rng, n, rng.randint(1, 3), equivalent=k % 3 == 0)
        truth = equal_up_to_phase(a, b)
        for enc, basis in ALL_ENCODINGS:
            v = check_equiv(a, b, enc, basis)
            assert v.equivalent == truth, (enc, basis, a, b)
            assert v.exact
            assert (v.score == 1) == v.equivalent


def test_fidelity_examples():
    fid, raw = fidelity_count(RZ8, T, Basis.PB)
    assert fid == pytest.approx(0.962, abs=5e-4)
    assert complex(raw).real == pytest.approx(3.848, abs=5e-4)
    assert fidelity(Circuit(1, []), parse_circuit("X 0\n")) == pytest.approx(0, abs=1e-12)
    assert fidelity(Circuit(1, []), T) == pytest.approx((2 + math.sqrt(2)) / 4)
    assert fidelity(Circuit(1, []), T, Basis.CB) == pytest.approx((2 + math.sqrt(2)) / 4)


def test_fidelity_self_is_one(rng):
    for _ in range(10):
        a, _ = random_pair(rng, rng.randint(1, 2), 3, equivalent=False)
        for basis in (Basis.CB, Basis.PB):
            assert fidelity(a, a, basis) == pytest.approx(1, abs=1e-12)


def test_fidelity_bases_agree_with_oracle_and_are_symmetric():
    rng = random.Random(41)
    for _ in range(25):
        a, b = random_pair(rng, rng.randint(1, 2), rng.randint(1, 3), equivalent=False, names=("H", "T", "TDG", "CX", "RZ"))
        want = jamiolkowski_fidelity(a, b)
        cb = fidelity(a, b, Basis.CB)
        pb = fidelity(a, b, Basis.PB)
        assert cb == pytest.approx(want, abs=1e-6)
        assert pb == pytest.approx(want, abs=1e-6)
        assert fidelity(b, a, Basis.PB) == pytest.approx(pb, abs=1e-9)


@pytest.mark.parametrize("eps", [0.1, 0.05, 0.01])
def test_eps_equivalence(eps):
    rng = random.Random(int(eps * 1000))
    for _ in range(15):
        a, b = random_pair(rng, 1, rng.randint(1, 4), equivalent=False)
        want = jamiolkowski_fidelity(a, b) >= 1 - eps
        assert (fidelity(a, b, Basis.PB) >= 1 - eps) == want
