"""Weighted CNF formulas with state / auxiliary / gate-selecting variables.

Literals are non-zero ints in DIMACS style. Clauses are tuples of literals.
Only auxiliary variables may carry weights; every other variable is
unbiased (weight 1 for both polarities).
"""

from __future__ import annotations

import enum
import io
import os
from itertools import combinations
from typing import IO, Iterable, Sequence

from .weights import ONE, ExactW, Weight, as_weight


class VarKind(enum.Enum):
    STATE = "state"
    AUX = "aux"
    SELECT = "select"


class CnfParseError(ValueError):
    """Malformed weighted-CNF text; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__("line %d: %s" % (lineno, message))
        self.lineno = lineno


class WeightedCnf:
    """A CNF formula over dense variable ids ``1..num_vars``.

    ``weights`` maps literals to weights; a variable mentioned there has both
    polarities present. Absent literals weigh 1. ``branch_hint`` optionally
    lists variables a counter should branch on first, in that order; it never
    changes a count.
    """

    def __init__(self) -> None:
        self.kinds: list[VarKind] = []
        self.clauses: list[tuple[int, ...]] = []
        self.weights: dict[int, Weight] = {}
        self.branch_hint: list[int] = []

    @property
    def num_vars(self) -> int:
        return len(self.kinds)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def num_literals(self) -> int:
        return sum(len(c) for c in self.clauses)

    def kind(self, var: int) -> VarKind:
        return self.kinds[var - 1]

    def vars_of_kind(self, kind: VarKind) -> list[int]:
        return [v for v, k in enumerate(self.kinds, start=1) if k is kind]

    @property
    def select_vars(self) -> list[int]:
        return self.vars_of_kind(VarKind.SELECT)

    def is_exact(self) -> bool:
        return all(isinstance(w, ExactW) for w in self.weights.values())

    # -- construction ---------------------------------------------------------

    def fresh_vars(self, kind: VarKind, count: int) -> list[int]:
        if count < 1:
            raise ValueError("count must be at least 1")
        start = self.num_vars + 1
        self.kinds.extend([kind] * count)
        return list(range(start, start + count))

    def fresh_var(self, kind: VarKind) -> int:
        return self.fresh_vars(kind, 1)[0]

    def _check_lit(self, lit: int) -> None:
        if lit == 0 or abs(lit) > self.num_vars:
            raise ValueError("literal %d refers to an unknown variable" % lit)

    def add_clause(self, lits: Iterable[int]) -> None:
        """Add a clause; duplicate literals are merged, tautologies dropped."""
        seen: list[int] = []
        for lit in lits:
            self._check_lit(lit)
            if -lit in seen:
                return
            if lit not in seen:
                seen.append(lit)
        self.clauses.append(tuple(seen))

    def add_clauses(self, clauses: Iterable[Iterable[int]]) -> None:
        for c in clauses:
            self.add_clause(c)

    def add_iff(self, a: int, b: int) -> None:
        self.add_clause((-a, b))
        self.add_clause((a, -b))

    def add_iff_and(self, a: int, bs: Sequence[int]) -> None:
        """``a <-> AND(bs)``."""
        for b in bs:
            self.add_clause((-a, b))
        self.add_clause([a] + [-b for b in bs])

    def add_xor3(self, a: int, b: int, c: int) -> None:
        """``a xor b xor c = 0``: forbid the four odd-parity assignments."""
        for sa, sb, sc in ((1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
            # clause falsified exactly by the assignment (sa, sb, sc) of odd parity
            self.add_clause((-sa * a, -sb * b, -sc * c))

    def add_exactly_one(self, variables: Sequence[int]) -> None:
        if not variables:
            raise ValueError("exactly-one over an empty set")
        self.add_clause(variables)
        for u, v in combinations(variables, 2):
            self.add_clause((-u, -v))

    def set_weight(self, var: int, w_true: Weight, w_false: Weight = ONE) -> None:
        self._check_lit(var)
        if self.kind(var) is not VarKind.AUX:
            raise ValueError("only auxiliary variables may be weighted (var %d)" % var)
        self.weights[var] = as_weight(w_true)
        self.weights[-var] = as_weight(w_false)

    def weight(self, lit: int) -> Weight:
        return self.weights.get(lit, ONE)

    def conjoin(self, other: WeightedCnf) -> int:
        """Append ``other`` with its variables shifted; returns the shift."""
        shift = self.num_vars

        def mv(lit: int) -> int:
            return lit + shift if lit > 0 else lit - shift

        self.kinds.extend(other.kinds)
        self.clauses.extend(tuple(mv(l) for l in c) for c in other.clauses)
        for lit, w in other.weights.items():
            self.weights[mv(lit)] = w
        self.branch_hint.extend(v + shift for v in other.branch_hint)
        return shift

    def copy(self) -> WeightedCnf:
        g = WeightedCnf()
        g.kinds = list(self.kinds)
        g.clauses = list(self.clauses)
        g.weights = dict(self.weights)
        g.branch_hint = list(self.branch_hint)
        return g

    def stats(self) -> dict:
        return {
            "cnf_vars": self.num_vars,
            "cnf_clauses": self.num_clauses,
            "cnf_literals": self.num_literals,
            "select_vars": len(self.select_vars),
        }

    def __repr__(self) -> str:
        return "WeightedCnf(vars=%d, clauses=%d, weighted=%d)" % (
            self.num_vars,
            self.num_clauses,
            len(self.weights) // 2,
        )


# -- text format ----------------------------------------------------------------


def _weight_fields(w: Weight) -> str:
    if isinstance(w, ExactW):
        return "exact %d,%d,%d,%d,%d" % (w.a, w.b, w.c, w.d, w.k)
    return "float %s %s" % (format(w.real, ".17g"), format(w.imag, ".17g"))


def write_wcnf(f: WeightedCnf, sink: IO[str] | str | os.PathLike) -> None:
    """Write ``f`` in the weighted-CNF text format to a stream or path."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w") as fh:
            write_wcnf(f, fh)
        return
    sink.write("p wcnf %d %d\n" % (f.num_vars, f.num_clauses))
    for v, k in enumerate(f.kinds, start=1):
        sink.write("c kind %d %s\n" % (v, k.value))
    for lit in sorted(f.weights, key=lambda l: (abs(l), l < 0)):
        sink.write("w %d %s\n" % (lit, _weight_fields(f.weights[lit])))
    for c in f.clauses:
        sink.write(" ".join(str(l) for l in c) + " 0\n")


def to_wcnf_text(f: WeightedCnf) -> str:
    buf = io.StringIO()
    write_wcnf(f, buf)
    return buf.getvalue()


def read_wcnf(source: IO[str] | str | os.PathLike) -> WeightedCnf:
    """Parse the weighted-CNF text format from a stream or path."""
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            return read_wcnf(fh)
    return parse_wcnf(source.read())


def parse_wcnf(text: str) -> WeightedCnf:
    f = WeightedCnf()
    declared = None
    kinds: dict[int, VarKind] = {}
    weights: dict[int, Weight] = {}
    clauses: list[tuple[int, ...]] = []
    pending: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        head = fields[0]
        if head == "p":
            if declared is not None:
                raise CnfParseError(lineno, "duplicate header")
            if len(fields) != 4 or fields[1] != "wcnf":
                raise CnfParseError(lineno, "expected 'p wcnf <nvars> <nclauses>'")
            try:
                declared = (int(fields[2]), int(fields[3]))
            except ValueError:
                raise CnfParseError(lineno, "non-integer header field") from None
            continue
        if declared is None:
            if head == "c":
                continue
            raise CnfParseError(lineno, "content before header")
        if head == "c":
            if len(fields) >= 2 and fields[1] == "kind":
                if len(fields) != 4:
                    raise CnfParseError(lineno, "expected 'c kind <var> state|aux|select'")
                try:
                    kinds[int(fields[2])] = VarKind(fields[3])
                except ValueError:
                    raise CnfParseError(lineno, "bad kind line") from None
            continue
        if head == "w":
            weights[_parse_lit(fields, lineno)] = _parse_weight_fields(fields[2:], lineno)
            continue
        try:
            lits = [int(x) for x in fields]
        except ValueError:
            raise CnfParseError(lineno, "malformed clause") from None
        for lit in lits:
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if declared is None:
        raise CnfParseError(1, "missing header")
    if pending:
        raise CnfParseError(len(text.splitlines()), "unterminated clause")
    nvars, nclauses = declared
    if len(clauses) != nclauses:
        raise CnfParseError(len(text.splitlines()), "declared %d clauses, found %d" % (nclauses, len(clauses)))
    f.kinds = [kinds.get(v, VarKind.AUX) for v in range(1, nvars + 1)]
    for c in clauses:
        for lit in c:
            if abs(lit) > nvars:
                raise CnfParseError(0, "literal %d exceeds declared variable count" % lit)
    f.clauses = clauses
    for lit in weights:
        if abs(lit) > nvars:
            raise CnfParseError(0, "weight on unknown literal %d" % lit)
        if -lit not in weights:
            f.weights[-lit] = ONE
    f.weights.update(weights)
    return f


def _parse_lit(fields: list[str], lineno: int) -> int:
    try:
        lit = int(fields[1])
    except (IndexError, ValueError):
        raise CnfParseError(lineno, "bad weight literal") from None
    if lit == 0:
        raise CnfParseError(lineno, "weight on literal 0")
    return lit


def _parse_weight_fields(fields: list[str], lineno: int) -> Weight:
    if not fields:
        raise CnfParseError(lineno, "missing weight")
    try:
        if fields[0] == "exact" and len(fields) == 2:
            parts = [int(x) for x in fields[1].split(",")]
            if len(parts) != 5 or parts[4] < 0:
                raise ValueError
            return ExactW(*parts)
        if fields[0] == "float" and len(fields) == 3:
            return complex(float(fields[1]), float(fields[2]))
    except ValueError:
        pass
    raise CnfParseError(lineno, "weight syntax error: %s" % " ".join(fields))
