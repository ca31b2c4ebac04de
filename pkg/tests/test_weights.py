import cmath
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxsyn.weights import (
    IMAG,
    INV_SQRT2,
    OMEGA,
    ONE,
    ZERO,
    ExactW,
    parse_weight,
    render_weight,
    w_add,
    w_approx_eq,
    w_conj,
    w_mul,
    w_norm_sq,
)

ints = st.integers(min_value=-50, max_value=50)
exacts = st.builds(ExactW, ints, ints, ints, ints, st.integers(min_value=0, max_value=40))


def mp_value(x: ExactW):
    """High-precision value of an ExactW computed from its fields."""
    with mpmath.workdps(60):
        w = mpmath.expjpi(mpmath.mpf(1) / 4)
        num = x.a + x.b * w + x.c * w**2 + x.d * w**3
        return num / mpmath.sqrt(2) ** x.k


def test_add_omega_omega_cubed():
    assert w_add(OMEGA, ExactW(0, 0, 0, 1)) == ExactW(0, 1, 0, 1, 0)
    assert abs(complex(ExactW(0, 1, 0, 1)) - 1j * math.sqrt(2)) < 1e-15


def test_add_identity_and_promotion():
    x = ExactW(3, -1, 2, 5, 3)
    assert w_add(ZERO, x) == x
    r = w_add(INV_SQRT2, complex(0.0, 0.0))
    assert isinstance(r, complex)
    assert abs(r - 0.7071067812) < 1e-10


def test_mul_examples():
    assert w_mul(OMEGA, OMEGA) == ExactW(0, 0, 1, 0, 0)
    half = w_mul(INV_SQRT2, INV_SQRT2)
    assert complex(half) == 0.5
    assert half == ExactW(2, 0, 0, 0, 4)
    x = ExactW(1, 2, 3, 4, 5)
    assert w_mul(x, ONE) == x


def test_norm_sq_examples():
    assert w_norm_sq(OMEGA) == ONE
    assert w_norm_sq((ONE + IMAG) * INV_SQRT2) == ONE
    r = w_norm_sq(complex(3.848, 0))
    assert abs(r - 14.807104) < 1e-9 and r.imag == 0.0


def test_norm_sq_exact_is_real():
    x = ExactW(1, -2, 3, 7, 3)
    assert w_norm_sq(x).is_real()


def test_approx_eq_examples():
    assert w_approx_eq(ExactW(1, 0, 0, 0, 2), 0.5, 1e-9)
    assert not w_approx_eq(OMEGA, IMAG, 0)
    assert w_approx_eq(0.962, 0.9619, 1e-3)
    with pytest.raises(ValueError):
        w_approx_eq(ONE, ONE, -1.0)


def test_canonical_zero():
    assert ExactW(0, 0, 0, 0, 7) == ZERO
    assert ExactW(0, 0, 0, 0, 7).k == 0


def test_pickle_round_trip():
    import pickle

    x = ExactW(1, 2, 3, 4, 5)
    assert pickle.loads(pickle.dumps(x)) == x


def test_immutable():
    with pytest.raises(AttributeError):
        ONE.a = 2


@settings(max_examples=300, deadline=None)
@given(exacts, exacts, exacts)
def test_ring_laws(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert (x * y).conj() == x.conj() * y.conj()
    assert x + y == y + x
    assert x * y == y * x


@settings(max_examples=300, deadline=None)
@given(exacts, exacts)
def test_promotion_soundness(x, y):
    for op in (lambda a, b: a + b, lambda a, b: a * b, lambda a, b: a - b):
        exact = complex(op(x, y))
        approx = op(complex(x), complex(y))
        scale = max(1.0, abs(approx))
        assert abs(exact - approx) <= 1e-12 * scale


@settings(max_examples=300, deadline=None)
@given(exacts, exacts)
def test_canonical_uniqueness_against_high_precision(x, y):
    same_value = abs(mp_value(x) - mp_value(y)) < mpmath.mpf(10) ** -40
    assert same_value == (x == y)


@settings(max_examples=200, deadline=None)
@given(exacts)
def test_canonical_value_preserved(x):
    # rebuild from a scaled numerator: multiplying by 2 and adding two to k
    # leaves the value unchanged and must canonicalize back
    y = ExactW(2 * x.a, 2 * x.b, 2 * x.c, 2 * x.d, x.k + 2)
    assert y == x
    assert abs(complex(x) - complex(mp_value(x))) <= 1e-12 * max(1.0, abs(complex(x)))


@settings(max_examples=200, deadline=None)
@given(exacts)
def test_render_parse_round_trip(x):
    assert parse_weight(render_weight(x)) == x


@pytest.mark.parametrize("z", [0.5 + 0.25j, -1e-300 + 3e200j, complex(-0.0, -2.5), 1 / 3 - 2j / 7])
def test_float_render_round_trip(z):
    back = parse_weight(render_weight(z))
    assert back == z


def test_render_formats():
    assert render_weight(OMEGA) == "0,1,0,0/√2^0"
    assert render_weight(complex(0.5, -0.25)) == "0.5-0.25·i"


def test_from_complex_recognizes_ring_values():
    for j in range(8):
        w = ExactW.omega_power(j)
        assert ExactW.from_complex(complex(w)) == w
    assert ExactW.from_complex(cmath.exp(1j * math.pi / 8)) is None
    assert ExactW.from_complex((1 + math.sqrt(2)) / 4) == (ONE + ExactW(0, 1, 0, -1)) * ExactW(1, 0, 0, 0, 4)


def test_real_sign():
    assert ExactW(1, -1, 0, 1).real_sign() == -1  # 1 - sqrt2
    assert ExactW(-1, 1, 0, -1).real_sign() == 1
    assert ZERO.real_sign() == 0
    with pytest.raises(ValueError):
        OMEGA.real_sign()
