"""Equivalence checking and Jamiolkowski fidelity by weighted model counting.

Both reduce to the circuit ``C2 . C1^dag``: it is the identity up to a global
phase exactly when its boundary-identified (cyclic) count is maximal, and its
normalized cyclic count is the fidelity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .cnf import VarKind, WeightedCnf
from .counter import count
from .encoder import (
    Basis,
    EncodingError,
    encode_identity,
    encode_operator,
    encode_pauli_selector,
    operator_width,
)
from .weights import ExactW, Weight

FLOAT_TOL = 1e-6


class EqEncoding(str, enum.Enum):
    LINEAR = "linear"
    CYCLIC = "cyclic"
    LINEAR_CYCLIC = "lc"

    @classmethod
    def parse(cls, text: str) -> EqEncoding:
        t = text.lower().replace("-", "_")
        aliases = {"linear_cyclic": "lc", "linearcyclic": "lc"}
        return cls(aliases.get(t, t))


@dataclass
class EqVerdict:
    equivalent: bool
    score: float
    raw: Weight
    global_phase_note: bool
    exact: bool = True


def unit_paulis(n: int) -> list[str]:
    """``X_j`` and ``Z_j`` for every qubit ``j``, in that order."""
    out = []
    for j in range(n):
        for ch in "XZ":
            out.append("I" * j + ch + "I" * (n - j - 1))
    return out


def check_basis(enc: EqEncoding, basis: Basis) -> None:
    if enc is not EqEncoding.CYCLIC and basis is not Basis.PB:
        raise EncodingError("the %s encoding is defined only in the Pauli basis" % enc.value)


def miter(c1, c2, basis: Basis) -> tuple[WeightedCnf, list[int], list[int], int]:
    """Formula of ``C2 . C1^dag`` with its input and output state variables."""
    n = operator_width(c1)
    if operator_width(c2) != n:
        raise ValueError("operands act on different qubit counts")
    f = WeightedCnf()
    q_in, mid = encode_operator(f, c1, basis, adjoint=True)
    _, q_out = encode_operator(f, c2, basis, in_vars=mid)
    return f, q_in, q_out, n


def add_unit_pauli_choice(f: WeightedCnf, q: list[int], n: int) -> list[int]:
    """One-hot block choosing ``q`` among the ``X_j, Z_j`` strings."""
    strings = unit_paulis(n)
    sel = f.fresh_vars(VarKind.AUX, len(strings))
    f.add_exactly_one(sel)
    for s, p in zip(sel, strings):
        g = WeightedCnf()
        g.kinds = list(f.kinds)
        encode_pauli_selector(g, p, q)
        for (lit,) in g.clauses:
            f.add_clause((-s, lit))
    return sel


def _is_exact(w: Weight) -> bool:
    return isinstance(w, ExactW)


def check_equiv(c1, c2, enc: EqEncoding | str = EqEncoding.CYCLIC, basis: Basis | str = Basis.PB) -> EqVerdict:
    """Decide whether ``c2`` equals ``c1`` up to a global phase."""
    enc = EqEncoding.parse(enc) if isinstance(enc, str) else enc
    basis = Basis(basis)
    check_basis(enc, basis)
    f, q_in, q_out, n = miter(c1, c2, basis)
    if enc is EqEncoding.LINEAR:
        total = None
        every = True
        scores = []
        for p in unit_paulis(n):
            g = f.copy()
            encode_pauli_selector(g, p, q_in)
            encode_pauli_selector(g, p, q_out)
            c = count(g).count
            total = c if total is None else total + c
            if _is_exact(c):
                every = every and c == 1
            else:
                every = every and abs(complex(c) - 1) <= FLOAT_TOL
            scores.append(complex(c).real)
        score = sum(scores) / len(scores)
        exact = _is_exact(total)
        return EqVerdict(every, score, total, every, exact)
    encode_identity(f, q_in, q_out)
    if enc is EqEncoding.LINEAR_CYCLIC:
        add_unit_pauli_choice(f, q_in, n)
    raw = count(f).count
    exact = _is_exact(raw)
    if enc is EqEncoding.LINEAR_CYCLIC:
        target = 2 * n
        equivalent = raw == target if exact else abs(complex(raw) - target) <= FLOAT_TOL * target
        score = complex(raw).real / target
        note = equivalent
    elif basis is Basis.PB:
        target = 4**n
        equivalent = raw == target if exact else complex(raw).real >= (1 - FLOAT_TOL) * target
        score = complex(raw).real / target
        note = equivalent
    else:
        target = 4**n
        nsq = raw.norm_sq() if exact else abs(complex(raw)) ** 2
        equivalent = nsq == target if exact else nsq >= (1 - FLOAT_TOL) * target
        score = complex(nsq).real / target
        note = equivalent and not (raw == 2**n if exact else abs(complex(raw) - 2**n) <= FLOAT_TOL)
    return EqVerdict(bool(equivalent), score, raw, bool(note), exact)


def fidelity_count(c1, c2, basis: Basis | str = Basis.PB) -> tuple[float, Weight]:
    """Fidelity and the raw cyclic count it was computed from."""
    basis = Basis(basis)
    f, q_in, q_out, n = miter(c1, c2, basis)
    encode_identity(f, q_in, q_out)
    raw = count(f).count
    if basis is Basis.PB:
        z = complex(raw)
        if abs(z.imag) > 1e-9:
            raise EncodingError("Pauli-basis count is not real")
        fid = z.real / 4**n
    else:
        fid = abs(complex(raw)) ** 2 / 4**n
    return min(max(fid, 0.0), 1.0), raw


def fidelity(c1, c2, basis: Basis | str = Basis.PB) -> float:
    """Jamiolkowski fidelity of two circuits or unitaries."""
    return fidelity_count(c1, c2, basis)[0]
