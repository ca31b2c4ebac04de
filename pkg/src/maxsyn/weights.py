"""Exact and floating complex weights.

Every amplitude, Pauli coefficient and model count in this package is a
``Weight``: either an :class:`ExactW`, an element of the ring
``Z[w] / sqrt(2)^k`` with ``w = exp(i*pi/4)``, or a plain Python ``complex``.
Exact values stay exact under ``+``, ``-``, ``*`` and conjugation; anything
that touches a float operand becomes a ``complex``.
"""

from __future__ import annotations

import math
import re
from typing import Union

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _zsqrt2_sign(a: int, b: int) -> int:
    """Sign of ``a + b*sqrt(2)``."""
    if a >= 0 and b >= 0:
        return 0 if a == 0 and b == 0 else 1
    if a <= 0 and b <= 0:
        return -1
    # mixed signs: compare a^2 with 2 b^2
    lhs, rhs = a * a, 2 * b * b
    if a > 0:
        return 1 if lhs > rhs else -1
    return 1 if rhs > lhs else -1


class ExactW:
    """``(a + b*w + c*w^2 + d*w^3) / sqrt(2)^k`` in canonical form.

    Canonical form: while ``k > 0`` the numerator is not divisible by
    ``sqrt(2)``; zero is ``(0, 0, 0, 0, 0)``. Two instances are equal as
    values iff their fields are equal.
    """

    __slots__ = ("a", "b", "c", "d", "k")

    def __init__(self, a: int = 0, b: int = 0, c: int = 0, d: int = 0, k: int = 0):
        if k < 0:
            raise ValueError("denominator exponent must be non-negative")
        if a == 0 and b == 0 and c == 0 and d == 0:
            k = 0
        # sqrt(2) | x  iff  a = c and b = d (mod 2); x/sqrt(2) = x*(w - w^3)/2
        while k > 0 and (a - c) % 2 == 0 and (b - d) % 2 == 0:
            a, b, c, d = (b - d) // 2, (a + c) // 2, (b + d) // 2, (c - a) // 2
            k -= 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "k", k)

    def __setattr__(self, name, value):
        raise AttributeError("ExactW is immutable")

    def __reduce__(self):
        return (ExactW, self._fields())

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> ExactW:
        return cls(n, 0, 0, 0, 0)

    @classmethod
    def omega_power(cls, j: int) -> ExactW:
        """``w**j`` for any integer ``j``."""
        j %= 8
        sign = -1 if j >= 4 else 1
        coeffs = [0, 0, 0, 0]
        coeffs[j % 4] = sign
        return cls(*coeffs, 0)

    @classmethod
    def from_complex(
        cls, z: complex, max_log2_den: int = 4, tol: float = 1e-9
    ) -> ExactW | None:
        """Recognize ``z`` as a ring element whose real and imaginary parts are
        ``(p + q*sqrt(2)) / 2^m`` with ``m <= max_log2_den``; None otherwise."""
        z = complex(z)
        for m in range(max_log2_den + 1):
            scale = float(1 << m)
            parts = []
            for target in (z.real * scale, z.imag * scale):
                found = None
                bound = int(abs(target) / math.sqrt(2.0)) + 2
                for q in range(-bound, bound + 1):
                    p = round(target - q * math.sqrt(2.0))
                    if abs(p + q * math.sqrt(2.0) - target) <= tol * scale:
                        if found is None or abs(q) < abs(found[1]):
                            found = (p, q)
                if found is None:
                    break
                parts.append(found)
            if len(parts) == 2:
                (p, q), (pi, qi) = parts
                # p + q*sqrt2 + i*(pi + qi*sqrt2), sqrt2 = w - w^3, i*sqrt2 = w + w^3
                return cls(p, q + qi, pi, qi - q, 2 * m)
        return None

    # -- protocol -------------------------------------------------------------

    def _fields(self) -> tuple[int, int, int, int, int]:
        return (self.a, self.b, self.c, self.d, self.k)

    def __repr__(self) -> str:
        return "ExactW(%d, %d, %d, %d, %d)" % self._fields()

    def __str__(self) -> str:
        return render_weight(self)

    def __hash__(self) -> int:
        return hash(self._fields())

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = ExactW.from_int(other)
        if isinstance(other, ExactW):
            return self._fields() == other._fields()
        return NotImplemented

    def __bool__(self) -> bool:
        return bool(self.a or self.b or self.c or self.d)

    def __complex__(self) -> complex:
        re_ = self.a + (self.b - self.d) * _INV_SQRT2
        im_ = self.c + (self.b + self.d) * _INV_SQRT2
        scale = 2.0 ** (-self.k / 2.0)
        return complex(re_ * scale, im_ * scale)

    # -- arithmetic -----------------------------------------------------------

    def _numerator_at(self, k: int) -> tuple[int, int, int, int]:
        """Numerator rescaled to denominator sqrt(2)^k, k >= self.k."""
        a, b, c, d = self.a, self.b, self.c, self.d
        diff = k - self.k
        if diff % 2:
            a, b, c, d = b - d, a + c, b + d, c - a
        f = 1 << (diff // 2)
        return a * f, b * f, c * f, d * f

    def __add__(self, other):
        if isinstance(other, int):
            other = ExactW.from_int(other)
        if isinstance(other, ExactW):
            k = max(self.k, other.k)
            a1, b1, c1, d1 = self._numerator_at(k)
            a2, b2, c2, d2 = other._numerator_at(k)
            return ExactW(a1 + a2, b1 + b2, c1 + c2, d1 + d2, k)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __neg__(self) -> ExactW:
        return ExactW(-self.a, -self.b, -self.c, -self.d, self.k)

    def __sub__(self, other):
        if isinstance(other, (int, ExactW)):
            return self + (-other)
        if isinstance(other, (float, complex)):
            return complex(self) - other
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return ExactW(self.a * other, self.b * other, self.c * other, self.d * other, self.k)
        if isinstance(other, ExactW):
            a, b, c, d = self.a, self.b, self.c, self.d
            e, f, g, h = other.a, other.b, other.c, other.d
            return ExactW(
                a * e - b * h - c * g - d * f,
                a * f + b * e - c * h - d * g,
                a * g + b * f + c * e - d * h,
                a * h + b * g + c * f + d * e,
                self.k + other.k,
            )
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n: int) -> ExactW:
        if n < 0:
            raise ValueError("negative powers are not supported")
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> ExactW:
        # conj(w) = -w^3, conj(w^2) = -w^2, conj(w^3) = -w
        return ExactW(self.a, -self.d, -self.c, -self.b, self.k)

    def norm_sq(self) -> ExactW:
        return self * self.conj()

    def is_real(self) -> bool:
        return self.c == 0 and self.b == -self.d

    def real_sign(self) -> int:
        """Sign of a real value; raises for non-real values."""
        if not self.is_real():
            raise ValueError("value is not real")
        return _zsqrt2_sign(self.a, self.b)

    def half_pow(self, m: int) -> ExactW:
        """``self / sqrt(2)^m``."""
        return ExactW(self.a, self.b, self.c, self.d, self.k + m)


Weight = Union[ExactW, complex]

ZERO = ExactW()
ONE = ExactW(1)
OMEGA = ExactW(0, 1, 0, 0, 0)
IMAG = ExactW(0, 0, 1, 0, 0)
INV_SQRT2 = ExactW(1, 0, 0, 0, 1)


def as_weight(x) -> Weight:
    """Coerce ints to ExactW and floats to complex; pass weights through."""
    if isinstance(x, ExactW):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a weight")
    if isinstance(x, int):
        return ExactW.from_int(x)
    return complex(x)


def is_exact(x: Weight) -> bool:
    return isinstance(x, ExactW)


def to_complex(x: Weight) -> complex:
    return complex(x)


def w_add(x: Weight, y: Weight) -> Weight:
    return as_weight(x) + as_weight(y)


def w_mul(x: Weight, y: Weight) -> Weight:
    return as_weight(x) * as_weight(y)


def w_conj(x: Weight) -> Weight:
    x = as_weight(x)
    return x.conj() if isinstance(x, ExactW) else x.conjugate()


def w_norm_sq(x: Weight) -> Weight:
    """``x * conj(x)``; the imaginary part is exactly zero in both modes."""
    x = as_weight(x)
    if isinstance(x, ExactW):
        return x.norm_sq()
    return complex(x.real * x.real + x.imag * x.imag, 0.0)


def w_approx_eq(x: Weight, y: Weight, tol: float = 1e-9) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    x, y = as_weight(x), as_weight(y)
    if tol == 0 and isinstance(x, ExactW) and isinstance(y, ExactW):
        return x == y
    return abs(complex(x) - complex(y)) <= tol


# -- text rendering -----------------------------------------------------------


def render_weight(x: Weight) -> str:
    """``a,b,c,d/√2^k`` for exact values, ``re+im·i`` for floats."""
    x = as_weight(x)
    if isinstance(x, ExactW):
        return "%d,%d,%d,%d/√2^%d" % x._fields()
    return "%s%s%s·i" % (
        _fmt_float(x.real),
        "+" if x.imag >= 0 or math.isnan(x.imag) else "-",
        _fmt_float(abs(x.imag)),
    )


def _fmt_float(v: float) -> str:
    return format(v, ".17g")


_EXACT_RE = re.compile(r"^\s*(-?\d+),(-?\d+),(-?\d+),(-?\d+)/√2\^(\d+)\s*$")


def parse_weight(text: str) -> Weight:
    """Inverse of :func:`render_weight`."""
    m = _EXACT_RE.match(text)
    if m:
        return ExactW(*(int(g) for g in m.groups()))
    body = text.strip()
    if body.endswith("·i"):
        body = body[: -len("·i")]
        for pos in range(len(body) - 1, 0, -1):
            if body[pos] in "+-" and body[pos - 1] not in "eE":
                try:
                    im = float(body[pos + 1 :])
                    return complex(float(body[:pos]), -im if body[pos] == "-" else im)
                except ValueError:
                    break
    raise ValueError("unrecognized weight syntax: %r" % text)
