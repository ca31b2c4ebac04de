"""Weighted-CNF encodings of states, gates, layers and circuits.

Two bases are supported. In the computational basis (CB) each qubit at each
time step is one Boolean variable ``q`` and a gate formula ``F_G(q, q')``
weighs the pair ``(q, q')`` by the matrix entry ``<q'|G|q>``. In the Pauli
basis (PB) each qubit is a pair ``(x, z)`` naming a Pauli letter
(``00=I, 10=X, 11=Y, 01=Z``) and ``F_G`` weighs ``(P, P')`` by the
conjugation coefficient ``tr(P' G P G^dag) / 2^k``.

Most encodings come from one generic routine: given the table of a gate (or
state) over its in/out variables, zero entries are excluded by clauses and
the non-zero values are factored into magnitude, sign and phase parts, each
carried by one weighted auxiliary variable that is fully determined by the
table variables. Clause sets are minimized with Quine-McCluskey.
"""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from sympy import symbols
from sympy.logic import SOPform
from sympy.logic.boolalg import And, BooleanFalse, BooleanTrue, Not, Or

from .circuit import Circuit, Gate, Layer
from .cnf import VarKind, WeightedCnf
from .weights import INV_SQRT2, ONE, ZERO, ExactW, OMEGA, Weight


class Basis(str, enum.Enum):
    CB = "cb"
    PB = "pb"

    @property
    def width(self) -> int:
        """Boolean variables per qubit."""
        return 1 if self is Basis.CB else 2


class EncodingError(ValueError):
    pass


PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
BITS_PAULI = {v: k for k, v in PAULI_BITS.items()}


def alloc_state(f: WeightedCnf, n: int, basis: Basis) -> list[int]:
    """Fresh state variables for ``n`` qubits (``x0, z0, x1, z1, ...`` in PB)."""
    return f.fresh_vars(VarKind.STATE, n * basis.width)


def qubit_slice(vars_: Sequence[int], basis: Basis, qubits: Sequence[int]) -> list[int]:
    w = basis.width
    out: list[int] = []
    for q in qubits:
        out.extend(vars_[q * w : q * w + w])
    return out


# -- exact small linear algebra ---------------------------------------------------

EMat = list[list[Weight]]


def _mat_mul(a: EMat, b: EMat) -> EMat:
    n, m, p = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = ZERO if isinstance(a[0][0], ExactW) and isinstance(b[0][0], ExactW) else 0j
            for t in range(m):
                x, y = a[i][t], b[t][j]
                if x and y:
                    acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


def _dagger(a: EMat) -> EMat:
    return [[_conj(a[j][i]) for j in range(len(a))] for i in range(len(a[0]))]


def _conj(x: Weight) -> Weight:
    return x.conj() if isinstance(x, ExactW) else complex(x).conjugate()


def _kron(a: EMat, b: EMat) -> EMat:
    return [[x * y for x in ra for y in rb] for ra in a for rb in b]


def _trace(a: EMat) -> Weight:
    acc = a[0][0]
    for i in range(1, len(a)):
        acc = acc + a[i][i]
    return acc


_EX_PAULI: dict[str, EMat] = {
    "I": [[ONE, ZERO], [ZERO, ONE]],
    "X": [[ZERO, ONE], [ONE, ZERO]],
    "Y": [[ZERO, -ExactW(0, 0, 1)], [ExactW(0, 0, 1), ZERO]],
    "Z": [[ONE, ZERO], [ZERO, -ONE]],
}


def pauli_matrix(letters: str, exact: bool = True) -> EMat:
    m: EMat = [[ONE]]
    for ch in letters:
        m = _kron(m, _EX_PAULI[ch])
    if not exact:
        m = [[complex(x) for x in r] for r in m]
    return m


def _bits_to_pauli(bits: Sequence[int]) -> str:
    return "".join(BITS_PAULI[(bits[i], bits[i + 1])] for i in range(0, len(bits), 2))


def _is_zero(v: Weight, tol: float = 1e-12) -> bool:
    if isinstance(v, ExactW):
        return not v
    return abs(v) <= tol


# -- tables -----------------------------------------------------------------------

Table = dict[tuple[int, ...], Weight]


def _gate_matrix(gate: Gate) -> tuple[EMat, bool]:
    em = gate.exact_matrix()
    if em is not None:
        return [list(r) for r in em], True
    return [[complex(x) for x in r] for r in gate.float_matrix()], False


def _gate_key(gate: Gate):
    return (gate.name, len(gate.qubits), gate.theta, gate.matrix)


def cb_table(gate: Gate) -> Table:
    """``(in_bits + out_bits) -> <out|G|in>``."""
    return dict(_cb_table(_gate_key(gate), gate))


def pb_table(gate: Gate) -> Table:
    """``(in_xz_bits + out_xz_bits) -> tr(P_out G P_in G^dag) / 2^k``."""
    return dict(_pb_table(_gate_key(gate), gate))


@lru_cache(maxsize=512)
def _cb_table(key, gate: Gate) -> tuple:
    m, _ = _gate_matrix(gate)
    k = gate.arity
    out = []
    for ib in itertools.product((0, 1), repeat=k):
        for ob in itertools.product((0, 1), repeat=k):
            out.append((ib + ob, m[_index(ob)][_index(ib)]))
    return tuple(out)


@lru_cache(maxsize=512)
def _pb_table(key, gate: Gate) -> tuple:
    m, exact = _gate_matrix(gate)
    k = gate.arity
    md = _dagger(m)
    entries = []
    letters = ["".join(p) for p in itertools.product("IXYZ", repeat=k)]
    for pin in letters:
        conj = _mat_mul(_mat_mul(m, pauli_matrix(pin, exact)), md)
        for pout in letters:
            c = _trace(_mat_mul(pauli_matrix(pout, exact), conj))
            c = c.half_pow(2 * k) if isinstance(c, ExactW) else c / (1 << k)
            if not isinstance(c, ExactW):
                if abs(c.imag) > 1e-9:
                    raise EncodingError("non-real Pauli coefficient for %s" % gate.name)
                c = complex(c.real, 0.0)
            entries.append((_pauli_bits(pin) + _pauli_bits(pout), c))
    return tuple(entries)


def _pauli_bits(letters: str) -> tuple[int, ...]:
    return tuple(b for ch in letters for b in PAULI_BITS[ch])


def _index(bits: Sequence[int]) -> int:
    i = 0
    for b in bits:
        i = (i << 1) | b
    return i


# -- Quine-McCluskey ----------------------------------------------------------------

Term = tuple[tuple[int, bool], ...]

_MINIMIZE_LIMIT = 8


@lru_cache(maxsize=4096)
def _min_dnf(nbits: int, minterms: frozenset, dontcares: frozenset) -> tuple[Term, ...]:
    """A small DNF covering ``minterms`` and avoiding every bit tuple that is
    neither a minterm nor a don't-care."""
    if not minterms:
        return ()
    if nbits > _MINIMIZE_LIMIT:
        return tuple(tuple((i, bool(b)) for i, b in enumerate(m)) for m in sorted(minterms))
    syms = symbols("v0:%d" % nbits)
    expr = SOPform(list(syms), [list(m) for m in sorted(minterms)], [list(m) for m in sorted(dontcares)])
    index = {s: i for i, s in enumerate(syms)}
    if isinstance(expr, BooleanTrue):
        return ((),)
    if isinstance(expr, BooleanFalse):
        return ()
    terms = expr.args if isinstance(expr, Or) else (expr,)
    out = []
    for t in terms:
        lits = t.args if isinstance(t, And) else (t,)
        term = []
        for lit in lits:
            if isinstance(lit, Not):
                term.append((index[lit.args[0]], False))
            else:
                term.append((index[lit], True))
        out.append(tuple(sorted(term)))
    return tuple(sorted(out))


# -- emitter ------------------------------------------------------------------------


class _Emitter:
    """Adds clauses and weighted auxiliaries, optionally guarded by a literal:
    with a guard ``p`` every clause becomes ``-p or clause`` and every
    auxiliary is forced false when ``p`` is false."""

    def __init__(self, f: WeightedCnf, guard: int | None = None):
        self.f = f
        self.guard = guard
        self.aux_vars: list[int] = []

    def clause(self, lits: Sequence[int]) -> None:
        if self.guard is None:
            self.f.add_clause(lits)
        else:
            self.f.add_clause((-self.guard,) + tuple(lits))

    def aux(self, weight: Weight) -> int:
        a = self.f.fresh_var(VarKind.AUX)
        self.f.set_weight(a, weight)
        if self.guard is not None:
            self.f.add_clause((self.guard, -a))
        self.aux_vars.append(a)
        return a

    def unweighted_aux(self) -> int:
        a = self.f.fresh_var(VarKind.AUX)
        if self.guard is not None:
            self.f.add_clause((self.guard, -a))
        self.aux_vars.append(a)
        return a


def _term_clause(vars_: Sequence[int], term: Term) -> tuple[int, ...]:
    """Clause equivalent to NOT(term)."""
    return tuple(-vars_[i] if val else vars_[i] for i, val in term)


def _factor(v: Weight):
    """Split a non-zero value into (magnitude, negative?, phase) where the
    phase is None for 1 and otherwise a weight of modulus 1."""
    if isinstance(v, ExactW):
        for j in range(8):
            r = v * ExactW.omega_power(-j)
            if r.is_real() and r.real_sign() > 0:
                ph = j % 4
                return r, j >= 4, (ExactW.omega_power(ph) if ph else None)
        return v, False, None
    mag = abs(v)
    ang = cmath.phase(v)
    neg = False
    if math.cos(ang) < -1e-12 or (abs(math.cos(ang)) <= 1e-12 and math.sin(ang) < 0):
        neg = True
        ang = ang - math.pi if ang > 0 else ang + math.pi
    ph = None if abs(ang) <= 1e-12 else complex(cmath.exp(1j * ang))
    return complex(mag), neg, ph


def _group_key(w: Weight):
    if isinstance(w, ExactW):
        return ("e", w)
    return ("f", round(w.real, 12), round(w.imag, 12))


def encode_table(em: _Emitter, vars_: Sequence[int], table: Table) -> None:
    """Encode a weight table over ``vars_`` (bit tuples in ``vars_`` order)."""
    nbits = len(vars_)
    support = frozenset(b for b, v in table.items() if not _is_zero(v))
    zeros = frozenset(b for b, v in table.items() if _is_zero(v))
    missing = set(itertools.product((0, 1), repeat=nbits)) - support - zeros
    zeros = zeros | frozenset(missing)
    if not support:
        em.clause(())
        return
    for term in _min_dnf(nbits, zeros, frozenset()):
        em.clause(_term_clause(vars_, term))
    mags: dict = {}
    signs: set = set()
    phases: dict = {}
    for b in sorted(support):
        mag, neg, ph = _factor(table[b])
        if not (isinstance(mag, ExactW) and mag == ONE) and not (
            not isinstance(mag, ExactW) and abs(mag - 1) <= 1e-12
        ):
            mags.setdefault(_group_key(mag), (mag, set()))[1].add(b)
        if neg:
            signs.add(b)
        if ph is not None:
            phases.setdefault(_group_key(ph), (ph, set()))[1].add(b)
    exact = isinstance(next(iter(table.values())), ExactW)
    minus_one = -ONE if exact else complex(-1.0)
    groups = [mags[k] for k in sorted(mags, key=str)]
    if signs:
        groups.append((minus_one, signs))
    groups.extend(phases[k] for k in sorted(phases, key=str))
    for weight, bits in groups:
        a = em.aux(weight)
        bits = frozenset(bits)
        if bits == support:
            em.clause((a,))
            continue
        for term in _min_dnf(nbits, bits, zeros):
            em.clause(_term_clause(vars_, term) + (a,))
        for term in _min_dnf(nbits, support - bits, zeros):
            em.clause(_term_clause(vars_, term) + (-a,))


# -- hand-written encodings (the classic H / T / CX shapes) ---------------------------


def _cb_h(em: _Emitter, i: Sequence[int], o: Sequence[int]) -> None:
    q, qp = i[0], o[0]
    h = em.aux(INV_SQRT2)
    r = em.aux(-ONE)
    em.clause((h,))
    # r <-> q and q'
    em.clause((-r, q))
    em.clause((-r, qp))
    em.clause((r, -q, -qp))


def _cb_t(em: _Emitter, i, o, dag: bool = False) -> None:
    q, qp = i[0], o[0]
    em.clause((-q, qp))
    em.clause((q, -qp))
    w = em.aux(OMEGA.conj() if dag else OMEGA)
    em.clause((-w, q))
    em.clause((w, -q))


def _cb_cx(em: _Emitter, i, o) -> None:
    c, t = i
    cp, tp = o
    em.clause((-c, cp))
    em.clause((c, -cp))
    # t' xor t xor c = 0
    for sa, sb, sc in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
        em.clause((-sa * tp, -sb * t, -sc * c))


def _pb_h(em: _Emitter, i, o) -> None:
    x, z = i
    xp, zp = o
    r = em.aux(-ONE)
    em.clause((-r, x))
    em.clause((-r, z))
    em.clause((r, -x, -z))
    em.clause((-zp, x))
    em.clause((zp, -x))
    em.clause((-xp, z))
    em.clause((xp, -z))


_HAND = {
    (Basis.CB, "H"): _cb_h,
    (Basis.CB, "T"): _cb_t,
    (Basis.CB, "TDG"): lambda em, i, o: _cb_t(em, i, o, dag=True),
    (Basis.CB, "CX"): _cb_cx,
    (Basis.PB, "H"): _pb_h,
}


# -- public encoders ------------------------------------------------------------------


def encode_gate(
    f: WeightedCnf,
    gate: Gate,
    basis: Basis,
    in_vars: Sequence[int],
    out_vars: Sequence[int],
    guard: int | None = None,
) -> list[int]:
    """Add ``F_G(in, out)`` to ``f`` (implied by ``guard`` when given).

    ``in_vars``/``out_vars`` cover the gate's own qubits in gate order.
    Returns the auxiliary variables introduced.
    """
    basis = Basis(basis)
    width = gate.arity * basis.width
    if len(in_vars) != width or len(out_vars) != width:
        raise EncodingError("%s needs %d in/out variables in %s" % (gate.name, width, basis.value))
    em = _Emitter(f, guard)
    hand = _HAND.get((basis, gate.name))
    if hand is not None:
        hand(em, list(in_vars), list(out_vars))
    else:
        table = cb_table(gate) if basis is Basis.CB else pb_table(gate)
        encode_table(em, list(in_vars) + list(out_vars), table)
    return em.aux_vars


def encode_identity(f: WeightedCnf, in_vars: Sequence[int], out_vars: Sequence[int], guard: int | None = None) -> None:
    """``in <-> out`` variable-wise (``(x<->x') and (z<->z')`` in PB)."""
    em = _Emitter(f, guard)
    for a, b in zip(in_vars, out_vars):
        em.clause((-a, b))
        em.clause((a, -b))


def encode_rz(f: WeightedCnf, theta: float, basis: Basis, in_vars, out_vars, guard=None) -> list[int]:
    return encode_gate(f, Gate("RZ", (0,), theta=theta), basis, in_vars, out_vars, guard)


def encode_unitary(f: WeightedCnf, matrix, in_vars, out_vars, guard=None) -> list[int]:
    """CB encoding of a dense unitary; exact weights when every entry is
    recognized as a ring element."""
    m = np.asarray(matrix, dtype=complex)
    n = m.shape[0].bit_length() - 1
    if m.shape != (1 << n, 1 << n):
        raise EncodingError("matrix must be 2^n x 2^n")
    if not np.allclose(m.conj().T @ m, np.eye(1 << n), atol=1e-9):
        raise EncodingError("matrix is not unitary")
    return encode_gate(f, Gate.unitary(m, range(n)), Basis.CB, in_vars, out_vars, guard)


def encode_layer(
    f: WeightedCnf, layer: Layer, n: int, basis: Basis, in_vars: Sequence[int], out_vars: Sequence[int]
) -> None:
    busy: set[int] = set()
    for g in layer:
        encode_gate(f, g, basis, qubit_slice(in_vars, basis, g.qubits), qubit_slice(out_vars, basis, g.qubits))
        busy.update(g.qubits)
    for q in range(n):
        if q not in busy:
            encode_identity(f, qubit_slice(in_vars, basis, [q]), qubit_slice(out_vars, basis, [q]))


def encode_circuit(
    f: WeightedCnf,
    circuit: Circuit,
    basis: Basis,
    in_vars: Sequence[int] | None = None,
    slices: list[list[int]] | None = None,
) -> tuple[list[int], list[int]]:
    """Chain the layer encodings over fresh intermediate state variables.
    An empty circuit gets explicit ``in <-> out`` clauses. Every state slice
    after the input is appended to ``slices`` when given."""
    basis = Basis(basis)
    n = circuit.n
    q_in = list(in_vars) if in_vars is not None else alloc_state(f, n, basis)
    if len(q_in) != n * basis.width:
        raise EncodingError("input width does not match the circuit")
    cur = q_in
    if circuit.depth == 0:
        out = alloc_state(f, n, basis)
        encode_identity(f, q_in, out)
        if slices is not None:
            slices.append(out)
        return q_in, out
    for layer in circuit.layers:
        nxt = alloc_state(f, n, basis)
        encode_layer(f, layer, n, basis, cur, nxt)
        if slices is not None:
            slices.append(nxt)
        cur = nxt
    return q_in, cur


def encode_cb_selector(f: WeightedCnf, bits: Sequence[int] | str, vars_: Sequence[int]) -> None:
    bits = [int(b) for b in bits]
    if len(bits) != len(vars_):
        raise EncodingError("selector width mismatch")
    for b, v in zip(bits, vars_):
        f.add_clause((v if b else -v,))


def encode_pauli_selector(f: WeightedCnf, pauli: str, vars_: Sequence[int]) -> None:
    if 2 * len(pauli) != len(vars_):
        raise EncodingError("selector width mismatch")
    for i, ch in enumerate(pauli.upper()):
        x, z = PAULI_BITS[ch]
        f.add_clause((vars_[2 * i] if x else -vars_[2 * i],))
        f.add_clause((vars_[2 * i + 1] if z else -vars_[2 * i + 1],))


# -- states -----------------------------------------------------------------------------

_H = INV_SQRT2
STATE_VECTORS: dict[str, tuple[ExactW, ExactW]] = {
    "0": (ONE, ZERO),
    "1": (ZERO, ONE),
    "+": (_H, _H),
    "-": (_H, -_H),
    "A": (_H, OMEGA * _H),
}


@dataclass(frozen=True)
class MaxEntangled:
    """``sum_i |i>|i> / sqrt(2^m)`` on ``2m`` qubits; qubit ``i`` pairs with ``m+i``."""

    n: int

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError("maximally entangled state needs an even qubit count")


def state_tables(psi: Sequence[Weight], k: int, basis: Basis) -> Table:
    """Amplitude (CB) or Pauli-coefficient (PB) table of a k-qubit pure state."""
    if basis is Basis.CB:
        return {tuple(int(c) for c in format(i, "0%db" % k)): psi[i] for i in range(1 << k)}
    rho = [[a * _conj(b) for b in psi] for a in psi]
    exact = all(isinstance(x, ExactW) for x in psi)
    table = {}
    for letters in itertools.product("IXYZ", repeat=k):
        p = "".join(letters)
        c = _trace(_mat_mul(pauli_matrix(p, exact), rho))
        c = c.half_pow(2 * k) if isinstance(c, ExactW) else complex(complex(c).real / (1 << k), 0.0)
        table[_pauli_bits(p)] = c
    return table


def encode_state(
    f: WeightedCnf, state: str | MaxEntangled, basis: Basis, vars_: Sequence[int] | None = None
) -> list[int]:
    """Encode a product state (letters ``0 1 + - A`` per qubit) or
    :class:`MaxEntangled`. Returns the state variables."""
    basis = Basis(basis)
    if isinstance(state, MaxEntangled):
        n = state.n
        q = list(vars_) if vars_ is not None else alloc_state(f, n, basis)
        m = n // 2
        pair = [_H, ZERO, ZERO, _H]
        table = state_tables(pair, 2, basis)
        for i in range(m):
            em = _Emitter(f)
            encode_table(em, qubit_slice(q, basis, [i, m + i]), table)
        return q
    letters = "".join(ch.upper() for ch in state)
    q = list(vars_) if vars_ is not None else alloc_state(f, len(letters), basis)
    if len(q) != len(letters) * basis.width:
        raise EncodingError("state width mismatch")
    for i, ch in enumerate(letters):
        if ch not in STATE_VECTORS:
            raise EncodingError("unknown state letter %r" % ch)
        table = state_tables(STATE_VECTORS[ch], 1, basis)
        encode_table(_Emitter(f), qubit_slice(q, basis, [i]), table)
    return q


def operator_width(op) -> int:
    """Qubit count of a circuit or a dense ``2^n x 2^n`` matrix."""
    if isinstance(op, Circuit):
        return op.n
    m = np.asarray(op)
    n = m.shape[0].bit_length() - 1
    if m.ndim != 2 or m.shape != (1 << n, 1 << n):
        raise EncodingError("matrix must be 2^n x 2^n")
    return n


def encode_operator(
    f: WeightedCnf,
    op,
    basis: Basis,
    in_vars: Sequence[int] | None = None,
    adjoint: bool = False,
    slices: list[list[int]] | None = None,
) -> tuple[list[int], list[int]]:
    """Encode a circuit, or a dense unitary as a single gate, optionally as
    its adjoint. Returns ``(q_in, q_out)``."""
    basis = Basis(basis)
    if isinstance(op, Circuit):
        return encode_circuit(f, op.dagger() if adjoint else op, basis, in_vars, slices)
    m = np.asarray(op, dtype=complex)
    n = operator_width(m)
    if adjoint:
        m = m.conj().T
    if not np.allclose(m.conj().T @ m, np.eye(1 << n), atol=1e-9):
        raise EncodingError("matrix is not unitary")
    q_in = list(in_vars) if in_vars is not None else alloc_state(f, n, basis)
    q_out = alloc_state(f, n, basis)
    encode_gate(f, Gate.unitary(m, range(n)), basis, q_in, q_out)
    if slices is not None:
        slices.append(q_out)
    return q_in, q_out
