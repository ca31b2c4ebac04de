"""Gates, layers, circuits and the circuit text format.

Qubit 0 is the most significant bit of a basis-state index, so a gate on
qubit ``j`` of ``n`` acts as ``I^(j) (x) U (x) I^(n-j-1)``. For multi-qubit
gates the first listed qubit is the most significant one of the gate's local
index (``CX c t`` has its control first).
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .weights import IMAG, INV_SQRT2, OMEGA, ExactW

ExactMatrix = tuple[tuple[ExactW, ...], ...]


@dataclass(frozen=True)
class GateDef:
    """Registry entry: a named fixed gate with an exact matrix."""

    name: str
    arity: int
    matrix: ExactMatrix
    adjoint: str


def _em(rows) -> ExactMatrix:
    return tuple(tuple(ExactW.from_int(x) if isinstance(x, int) else x for x in r) for r in rows)


_M_H = -INV_SQRT2
GATES: dict[str, GateDef] = {
    "I": GateDef("I", 1, _em([[1, 0], [0, 1]]), "I"),
    "H": GateDef("H", 1, _em([[INV_SQRT2, INV_SQRT2], [INV_SQRT2, _M_H]]), "H"),
    "S": GateDef("S", 1, _em([[1, 0], [0, IMAG]]), "SDG"),
    "SDG": GateDef("SDG", 1, _em([[1, 0], [0, -IMAG]]), "S"),
    "T": GateDef("T", 1, _em([[1, 0], [0, OMEGA]]), "TDG"),
    "TDG": GateDef("TDG", 1, _em([[1, 0], [0, OMEGA.conj()]]), "T"),
    "X": GateDef("X", 1, _em([[0, 1], [1, 0]]), "X"),
    "Z": GateDef("Z", 1, _em([[1, 0], [0, -1]]), "Z"),
    "CX": GateDef(
        "CX",
        2,
        _em([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
        "CX",
    ),
    "CZ": GateDef(
        "CZ",
        2,
        _em([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]),
        "CZ",
    ),
}


def register_gate(name: str, matrix: Sequence[Sequence], adjoint: str | None = None) -> GateDef:
    """Add a fixed gate given by an exact matrix (ints or ExactW entries)."""
    m = _em(matrix)
    dim = len(m)
    arity = dim.bit_length() - 1
    if dim != 1 << arity or any(len(r) != dim for r in m):
        raise ValueError("matrix must be 2^k x 2^k")
    gdef = GateDef(name.upper(), arity, m, (adjoint or name).upper())
    GATES[gdef.name] = gdef
    return gdef


@dataclass(frozen=True)
class Gate:
    """A placed gate.

    ``name`` is a registry name, ``"RZ"`` (with ``theta``) or ``"U"`` (with a
    dense ``matrix`` given as nested tuples of complex).
    """

    name: str
    qubits: tuple[int, ...]
    theta: float | None = None
    matrix: tuple[tuple[complex, ...], ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "name", self.name.upper())
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("gate qubits must be distinct: %r" % (self.qubits,))
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")
        if self.name == "RZ":
            if self.theta is None or len(self.qubits) != 1:
                raise ValueError("RZ needs an angle and one qubit")
        elif self.name == "U":
            if self.matrix is None:
                raise ValueError("U gate needs a matrix")
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (1 << len(self.qubits),) * 2:
                raise ValueError("U matrix size does not match its qubits")
            if not np.allclose(m.conj().T @ m, np.eye(m.shape[0]), atol=1e-9):
                raise ValueError("U matrix is not unitary")
        else:
            gdef = GATES.get(self.name)
            if gdef is None:
                raise ValueError("unknown gate %r" % self.name)
            if gdef.arity != len(self.qubits):
                raise ValueError("%s acts on %d qubit(s)" % (self.name, gdef.arity))

    @classmethod
    def unitary(cls, matrix, qubits: Sequence[int]) -> Gate:
        m = np.asarray(matrix, dtype=complex)
        return cls("U", tuple(qubits), matrix=tuple(tuple(complex(x) for x in r) for r in m))

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def adjoint(self) -> Gate:
        if self.name == "RZ":
            return Gate("RZ", self.qubits, theta=-self.theta)
        if self.name == "U":
            m = np.array(self.matrix, dtype=complex).conj().T
            return Gate.unitary(m, self.qubits)
        return Gate(GATES[self.name].adjoint, self.qubits)

    def exact_matrix(self) -> ExactMatrix | None:
        """Exact matrix when every entry lies in the ring, else None."""
        if self.name in GATES:
            return GATES[self.name].matrix
        if self.name == "U":
            return _recognize_matrix(self.matrix)
        return None

    def float_matrix(self) -> np.ndarray:
        if self.name == "RZ":
            t = self.theta / 2.0
            return np.diag([cmath.exp(-1j * t), cmath.exp(1j * t)])
        if self.name == "U":
            return np.array(self.matrix, dtype=complex)
        return np.array([[complex(x) for x in r] for r in GATES[self.name].matrix])

    def on(self, *qubits: int) -> Gate:
        return Gate(self.name, qubits, theta=self.theta, matrix=self.matrix)

    def to_text(self) -> str:
        qs = " ".join(str(q) for q in self.qubits)
        if self.name == "RZ":
            return "RZ(%r) %s" % (self.theta, qs)
        if self.name == "U":
            raise ValueError("dense unitaries have no circuit-text form")
        return "%s %s" % (self.name, qs)


@lru_cache(maxsize=256)
def _recognize_matrix(matrix) -> ExactMatrix | None:
    rows = []
    for r in matrix:
        row = []
        for x in r:
            e = ExactW.from_complex(x)
            if e is None:
                return None
            row.append(e)
        rows.append(tuple(row))
    return tuple(rows)


Layer = tuple[Gate, ...]


@dataclass
class Circuit:
    """``n`` qubits and a list of layers with disjoint gate supports."""

    n: int
    layers: list[Layer] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a circuit needs at least one qubit")
        self.layers = [tuple(layer) for layer in self.layers]
        for layer in self.layers:
            used: set[int] = set()
            for g in layer:
                for q in g.qubits:
                    if q >= self.n:
                        raise ValueError("qubit %d out of range for n=%d" % (q, self.n))
                    if q in used:
                        raise ValueError("qubit %d used twice in one layer" % q)
                    used.add(q)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def gates(self) -> Iterator[Gate]:
        for layer in self.layers:
            yield from layer

    @classmethod
    def from_gates(cls, n: int, gates: Iterable[Gate]) -> Circuit:
        """Greedy ASAP scheduling: each gate lands in the earliest layer after
        the last layer touching any of its qubits."""
        layers: list[list[Gate]] = []
        frontier = [0] * n
        for g in gates:
            if any(q >= n for q in g.qubits):
                raise ValueError("qubit index out of range for n=%d" % n)
            t = max(frontier[q] for q in g.qubits)
            while len(layers) <= t:
                layers.append([])
            layers[t].append(g)
            for q in g.qubits:
                frontier[q] = t + 1
        return cls(n, [tuple(l) for l in layers])

    def dagger(self) -> Circuit:
        return dagger(self)

    def then(self, other: Circuit) -> Circuit:
        """Circuit applying ``self`` first, then ``other``."""
        if other.n != self.n:
            raise ValueError("qubit counts differ")
        return Circuit(self.n, self.layers + other.layers)

    def uses_exact_gates(self) -> bool:
        return all(g.exact_matrix() is not None for g in self.gates())

    def to_text(self) -> str:
        return format_circuit(self)


def dagger(c: Circuit) -> Circuit:
    """Adjoint circuit: layers reversed, every gate replaced by its adjoint."""
    return Circuit(c.n, [tuple(g.adjoint() for g in layer) for layer in reversed(c.layers)])


# -- text format ----------------------------------------------------------------

_GATE_RE = re.compile(r"^([A-Za-z]+)(?:\(\s*([^)]*)\s*\))?$")
_QUBITS_HINT = re.compile(r"^#\s*qubits\s*[:=]?\s*(\d+)\s*$", re.IGNORECASE)


class CircuitParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


def _parse_angle(text: str) -> float:
    # plain float or an expression of pi, e.g. "pi/8"
    expr = text.strip().lower().replace("π", "pi")
    if not re.fullmatch(r"[0-9eE+\-*/(). pi]+", expr):
        raise ValueError(text)
    return float(eval(expr, {"__builtins__": {}}, {"pi": math.pi}))


def parse_circuit(text: str, n: int | None = None) -> Circuit:
    """Parse the one-gate-per-line format. ``LAYER`` lines force a layer
    boundary; gates between boundaries are scheduled ASAP. The qubit count is
    ``n``, a ``# qubits: N`` comment, or one more than the largest index."""
    segments: list[list[Gate]] = [[]]
    hint = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _QUBITS_HINT.match(line)
            if m:
                hint = int(m.group(1))
            continue
        fields = line.split()
        if fields[0].upper() == "LAYER" and len(fields) == 1:
            segments.append([])
            continue
        m = _GATE_RE.match(fields[0])
        if not m:
            raise CircuitParseError(lineno, "bad gate token %r" % fields[0])
        name, arg = m.group(1).upper(), m.group(2)
        try:
            qubits = tuple(int(x) for x in fields[1:])
        except ValueError:
            raise CircuitParseError(lineno, "qubit indices must be integers") from None
        try:
            if name == "RZ":
                if arg is None:
                    raise ValueError("RZ needs an angle, e.g. RZ(0.39269908169872414)")
                gate = Gate("RZ", qubits, theta=_parse_angle(arg))
            else:
                if arg is not None:
                    raise ValueError("%s takes no parameter" % name)
                gate = Gate(name, qubits)
        except ValueError as exc:
            raise CircuitParseError(lineno, str(exc)) from None
        segments[-1].append(gate)
    width = n if n is not None else hint
    if width is None:
        width = 1 + max((q for s in segments for g in s for q in g.qubits), default=0)
    layers: list[Layer] = []
    only_empty = len(segments) == 1 and not segments[0]
    if only_empty:
        return Circuit(width, [])
    for seg in segments:
        sub = Circuit.from_gates(width, seg) if seg else Circuit(width, [()])
        layers.extend(sub.layers)
    return Circuit(width, layers)


def format_circuit(c: Circuit) -> str:
    """Render with one ``LAYER`` separator between consecutive layers;
    explicit identity gates are omitted."""
    blocks = []
    for layer in c.layers:
        blocks.append("\n".join(g.to_text() for g in layer if g.name != "I"))
    lines = ["# qubits: %d" % c.n]
    for i, b in enumerate(blocks):
        if i:
            lines.append("LAYER")
        if b:
            lines.append(b)
    return "\n".join(lines) + "\n"


def parse_unitary(text: str) -> np.ndarray:
    """First line ``n``, then ``2^n`` rows of ``2^n`` complex entries."""
    rows = [l.split() for l in text.splitlines() if l.strip() and not l.lstrip().startswith("#")]
    if not rows:
        raise ValueError("empty unitary file")
    try:
        n = int(rows[0][0])
    except ValueError:
        raise ValueError("first line must be the qubit count") from None
    dim = 1 << n
    body = rows[1:]
    if len(body) != dim or any(len(r) != dim for r in body):
        raise ValueError("expected %d rows of %d entries" % (dim, dim))
    m = np.array([[complex(x.replace("i", "j")) for x in r] for r in body])
    if not np.allclose(m.conj().T @ m, np.eye(dim), atol=1e-9):
        raise ValueError("matrix is not unitary")
    return m


def format_unitary(m: np.ndarray) -> str:
    m = np.asarray(m, dtype=complex)
    n = m.shape[0].bit_length() - 1
    lines = [str(n)]
    for r in m:
        lines.append(" ".join("%s%sj" % (format(x.real, ".17g"), format(x.imag, "+.17g")) for x in r))
    return "\n".join(lines) + "\n"


def looks_like_unitary(text: str) -> bool:
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("#"):
            return s.isdigit()
    return False

