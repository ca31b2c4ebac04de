"""Depth-optimal synthesis by maximum weighted model counting.

For each depth ``d`` a formula is built that chains the adjoint of the
specification with ``d`` template layers whose gates are chosen by select
variables, and closes the chain with a boundary identification. The select
assignment maximizing the weighted count names the circuit closest to the
specification; the depth loop stops at the first ``d`` whose optimum reaches
the acceptance threshold.
"""

from __future__ import annotations

import enum
import itertools
import logging
import os
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .circuit import Circuit, Gate, GATES
from .cnf import VarKind, WeightedCnf, write_wcnf
from .counter import CounterTimeout, Objective, max_count
from .encoder import (
    Basis,
    EncodingError,
    alloc_state,
    encode_gate,
    encode_identity,
    encode_operator,
    operator_width,
    qubit_slice,
)
from .equivalence import EqEncoding, add_unit_pauli_choice
from .oracle import equal_up_to_phase, jamiolkowski_fidelity
from .weights import ExactW, Weight, render_weight

log = logging.getLogger(__name__)


class SynthesisError(RuntimeError):
    """Internal soundness failure: a reported solution fails verification."""


class DecodeError(SynthesisError):
    pass


class Mode(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"


class Rule(str, enum.Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    R5 = "R5"


ALL_RULES = frozenset(Rule)


def parse_rules(text: str | Iterable[str] | None) -> frozenset[Rule]:
    """``"all"``, ``"none"``, a comma list like ``"R1,R4"`` or an iterable."""
    if text is None:
        return frozenset()
    if isinstance(text, str):
        t = text.strip().lower()
        if t in ("", "none"):
            return frozenset()
        if t == "all":
            return ALL_RULES
        items = [x.strip() for x in text.split(",") if x.strip()]
    else:
        items = list(text)
    return frozenset(Rule(str(x).upper()) for x in items)


@dataclass(frozen=True)
class GateSetSpec:
    """Single-qubit gates (``I`` always first) and two-qubit gates."""

    g1: tuple[str, ...] = ("I", "H", "T", "TDG")
    g2: tuple[str, ...] = ("CX",)

    def __post_init__(self):
        g1 = tuple(g.upper() for g in self.g1)
        if "I" not in g1:
            g1 = ("I",) + g1
        g1 = ("I",) + tuple(g for g in g1 if g != "I")
        g2 = tuple(g.upper() for g in self.g2)
        for name, k in [(g, 1) for g in g1] + [(g, 2) for g in g2]:
            gdef = GATES.get(name)
            if gdef is None:
                raise ValueError("unknown gate %r" % name)
            if gdef.arity != k:
                raise ValueError("%s is not a %d-qubit gate" % (name, k))
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "g2", g2)

    @classmethod
    def parse(cls, text: str) -> GateSetSpec:
        names = [x.strip().upper() for x in text.split(",") if x.strip()]
        g1 = tuple(n for n in names if GATES.get(n) is not None and GATES[n].arity == 1)
        g2 = tuple(n for n in names if GATES.get(n) is not None and GATES[n].arity == 2)
        unknown = [n for n in names if n not in GATES]
        if unknown:
            raise ValueError("unknown gate(s): %s" % ", ".join(unknown))
        return cls(g1, g2)

    def non_identity(self) -> list[str]:
        return [g for g in self.g1 if g != "I"] + list(self.g2)


DEFAULT_GATES = GateSetSpec()


@dataclass
class LayerTemplate:
    """Select variables of one synthesis layer.

    ``single[(G, i)]`` is ``p_{G,i}``; ``double[(G, i, j)]`` is ``p_{G,i,j}``
    (gate on ordered qubits ``i, j``); ``groups[i]`` lists every selector
    touching qubit ``i``.
    """

    n: int
    single: dict[tuple[str, int], int]
    double: dict[tuple[str, int, int], int]
    groups: list[list[int]]
    in_vars: list[int]
    out_vars: list[int]

    @property
    def select_vars(self) -> list[int]:
        return sorted(list(self.single.values()) + list(self.double.values()))


def build_layer_template(
    f: WeightedCnf,
    n: int,
    gs: GateSetSpec,
    basis: Basis,
    q_in: Sequence[int],
    q_out: Sequence[int],
) -> LayerTemplate:
    """Add one layer: each selector implies its gate formula, and exactly one
    selector touching each qubit is true."""
    if n < 1:
        raise ValueError("n must be at least 1")
    basis = Basis(basis)
    single: dict[tuple[str, int], int] = {}
    double: dict[tuple[str, int, int], int] = {}
    groups: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        qi, qo = qubit_slice(q_in, basis, [i]), qubit_slice(q_out, basis, [i])
        for name in gs.g1:
            p = f.fresh_var(VarKind.SELECT)
            single[(name, i)] = p
            groups[i].append(p)
            if name == "I":
                encode_identity(f, qi, qo, guard=p)
            else:
                encode_gate(f, Gate(name, (i,)), basis, qi, qo, guard=p)
    for i, j in itertools.permutations(range(n), 2):
        qi, qo = qubit_slice(q_in, basis, [i, j]), qubit_slice(q_out, basis, [i, j])
        for name in gs.g2:
            p = f.fresh_var(VarKind.SELECT)
            double[(name, i, j)] = p
            groups[i].append(p)
            groups[j].append(p)
            encode_gate(f, Gate(name, (i, j)), basis, qi, qo, guard=p)
    for grp in groups:
        f.add_exactly_one(grp)
    return LayerTemplate(n, single, double, groups, list(q_in), list(q_out))


def _bisection(lo: int, hi: int) -> list[int]:
    """Indices strictly between ``lo`` and ``hi`` in midpoint-first order."""
    out = []
    todo = [(lo, hi)]
    while todo:
        a, b = todo.pop(0)
        if b - a < 2:
            continue
        m = (a + b) // 2
        out.append(m)
        todo.append((a, m))
        todo.append((m, b))
    return out


@dataclass
class SynFormula:
    cnf: WeightedCnf
    templates: list[LayerTemplate]
    n: int
    q_init: list[int]


def build_syn_formula(
    spec,
    gs: GateSetSpec,
    basis: Basis,
    enc: EqEncoding,
    d: int,
    rules: Iterable[Rule] = (),
    r2_general: bool = False,
) -> SynFormula:
    """Spec adjoint, ``d`` template layers and the boundary identification
    (plus the unit-Pauli choice on the initial variables for ``lc``)."""
    basis = Basis(basis)
    enc = EqEncoding.parse(enc) if isinstance(enc, str) else enc
    if d < 1:
        raise ValueError("depth must be at least 1")
    if enc is EqEncoding.LINEAR:
        raise EncodingError("synthesis supports the cyclic and lc encodings")
    if enc is EqEncoding.LINEAR_CYCLIC and basis is not Basis.PB:
        raise EncodingError("the lc encoding requires the Pauli basis")
    if not isinstance(spec, Circuit) and basis is not Basis.CB:
        raise EncodingError("unitary specifications are supported only in the computational basis")
    n = operator_width(spec)
    f = WeightedCnf()
    q = alloc_state(f, n, basis)
    spec_slices: list[list[int]] = []
    _, q0 = encode_operator(f, spec, basis, in_vars=q, adjoint=True, slices=spec_slices)
    slices = [q0]
    templates = []
    cur = q0
    for _ in range(d):
        nxt = alloc_state(f, n, basis)
        templates.append(build_layer_template(f, n, gs, basis, cur, nxt))
        slices.append(nxt)
        cur = nxt
    encode_identity(f, q, cur)
    if enc is EqEncoding.LINEAR_CYCLIC:
        add_unit_pauli_choice(f, q, n)
    # cut the cycle at the initial slice, then at the spec/template seam,
    # then bisect both paths so the counter's components are short segments
    order = [q, q0]
    order += [slices[i] for i in _bisection(0, d)]
    order += [spec_slices[i] for i in _bisection(-1, len(spec_slices) - 1) if i >= 0]
    hint: list[int] = []
    for s in order:
        hint.extend(v for v in s if v not in hint)
    f.branch_hint = hint
    add_pruning_rules(f, templates, rules, r2_general)
    return SynFormula(f, templates, n, q)


def add_pruning_rules(
    f: WeightedCnf, templates: Sequence[LayerTemplate], rules: Iterable[Rule], r2_general: bool = False
) -> int:
    """Add the symmetry-breaking clause families; returns the clause count."""
    rules = frozenset(Rule(r) for r in rules)
    before = f.num_clauses
    d = len(templates)
    if not templates:
        return 0
    n = templates[0].n

    def sel(t: int, name: str, *qs: int) -> int | None:
        tpl = templates[t]
        if len(qs) == 1:
            return tpl.single.get((name, qs[0]))
        return tpl.double.get((name,) + qs)

    pairs = list(itertools.permutations(range(n), 2))
    for k in range(d - 1):
        for i in range(n):
            if Rule.R1 in rules:
                a, b = sel(k, "H", i), sel(k + 1, "H", i)
                if a and b:
                    f.add_clause((-a, -b))
            if Rule.R4 in rules:
                a, b = sel(k, "I", i), sel(k + 1, "I", i)
                cx = []
                for j in range(n):
                    if j != i:
                        for s in (sel(k + 1, "CX", i, j), sel(k + 1, "CX", j, i)):
                            if s:
                                cx.append(s)
                f.add_clause([-a, b] + cx)
        for i, j in pairs:
            if Rule.R3 in rules:
                a, b = sel(k, "CX", i, j), sel(k + 1, "CX", i, j)
                if a and b:
                    f.add_clause((-a, -b))
            if Rule.R5 in rules:
                c = sel(k + 1, "CX", i, j)
                if c:
                    f.add_clause((-c, -sel(k, "I", i), -sel(k, "I", j)))
    if Rule.R2 in rules:
        for k in range(d - 7):
            for i in range(n):
                ts = [sel(k + j, "T", i) for j in range(8)]
                if all(ts):
                    f.add_clause([-p for p in ts])
                if r2_general:
                    tds = [sel(k + j, "TDG", i) for j in range(8)]
                    if not (all(ts) and all(tds)):
                        continue
                    for pattern in itertools.product((1, -1), repeat=8):
                        if sum(pattern) % 8 or all(s == 1 for s in pattern):
                            continue
                        f.add_clause([-(ts[j] if s == 1 else tds[j]) for j, s in enumerate(pattern)])
    return f.num_clauses - before


def decode_circuit(assignment: dict[int, bool], templates: Sequence[LayerTemplate]) -> Circuit:
    """Circuit named by a select assignment; idle wires for ``I``."""
    if not templates:
        raise DecodeError("no layers to decode")
    n = templates[0].n
    layers = []
    for t, tpl in enumerate(templates):
        for i, grp in enumerate(tpl.groups):
            on = [p for p in grp if assignment.get(p, False)]
            if len(on) != 1:
                raise DecodeError("layer %d qubit %d has %d active selectors" % (t, i, len(on)))
        gates = []
        for (name, i), p in sorted(tpl.single.items(), key=lambda kv: kv[1]):
            if assignment.get(p) and name != "I":
                gates.append(Gate(name, (i,)))
        for (name, i, j), p in sorted(tpl.double.items(), key=lambda kv: kv[1]):
            if assignment.get(p):
                gates.append(Gate(name, (i, j)))
        layers.append(tuple(gates))
    return Circuit(n, layers)


def assignment_for(circuit: Circuit, templates: Sequence[LayerTemplate]) -> dict[int, bool]:
    """Select assignment naming ``circuit`` (inverse of :func:`decode_circuit`)."""
    if circuit.depth != len(templates):
        raise ValueError("circuit depth does not match the template count")
    out: dict[int, bool] = {}
    for tpl, layer in zip(templates, circuit.layers):
        for p in tpl.select_vars:
            out[p] = False
        busy = set()
        for g in layer:
            if g.name == "I":
                continue
            key = (g.name,) + g.qubits
            p = tpl.single.get(key) if g.arity == 1 else tpl.double.get(key)
            if p is None:
                raise ValueError("gate %s is not in the template" % g.to_text())
            out[p] = True
            busy.update(g.qubits)
        for i in range(tpl.n):
            if i not in busy:
                out[tpl.single[("I", i)]] = True
    return out


# -- the depth loop ---------------------------------------------------------------


@dataclass
class DepthLog:
    depth: int
    score_raw: float
    score_norm: float
    elapsed_ms: float
    cnf_vars: int
    cnf_clauses: int
    raw: str = ""
    score_abs_norm: float | None = None
    threshold_hit: bool = False

    def as_dict(self) -> dict:
        d = {
            "depth": self.depth,
            "score_raw": self.score_raw,
            "score_norm": self.score_norm,
            "elapsed_ms": round(self.elapsed_ms, 3),
            "cnf_vars": self.cnf_vars,
            "cnf_clauses": self.cnf_clauses,
            "raw": self.raw,
            "threshold_hit": self.threshold_hit,
        }
        if self.score_abs_norm is not None:
            d["score_abs_norm"] = self.score_abs_norm
        return d


@dataclass
class SynthesisResult:
    found: bool
    circuit: Circuit | None
    depth: int | None
    score: float
    raw: Weight | None
    fidelity: float | None
    log: list[DepthLog] = field(default_factory=list)
    timed_out: bool = False
    best_circuits: list[Circuit] = field(default_factory=list)


def _targets(n: int, basis: Basis, enc: EqEncoding, mode: Mode, eps: float | None):
    """Objective kind, normalizer and threshold in objective space."""
    if enc is EqEncoding.LINEAR_CYCLIC:
        return Objective.REAL, 2 * n, float(2 * n)
    full = float(4**n)
    obj = Objective.REAL if basis is Basis.PB else Objective.NORMSQ
    if mode is Mode.EXACT:
        return obj, full, full
    return obj, full, (1.0 - eps) * full


def _exact_target_met(raw: Weight, n: int, basis: Basis, enc: EqEncoding) -> bool | None:
    """Exact ring check of an exact-mode hit; None for float counts."""
    if not isinstance(raw, ExactW):
        return None
    if enc is EqEncoding.LINEAR_CYCLIC:
        return raw == 2 * n
    if basis is Basis.PB:
        return raw == 4**n
    return raw.norm_sq() == 4**n


def _dump_path(template: str, depth: int) -> str:
    if "{depth}" in template:
        return template.format(depth=depth)
    root, ext = os.path.splitext(template)
    return "%s.d%d%s" % (root, depth, ext or ".wcnf")


def synthesize(
    spec,
    gs: GateSetSpec = DEFAULT_GATES,
    basis: Basis | str = Basis.PB,
    enc: EqEncoding | str = EqEncoding.CYCLIC,
    mode: Mode | str = Mode.EXACT,
    eps: float | None = None,
    max_depth: int = 4,
    rules: Iterable[Rule] = (),
    threads: int = 1,
    time_limit: float | None = None,
    dump_cnf: str | None = None,
    min_depth: int = 1,
    r2_general: bool = False,
    on_depth: Callable[[DepthLog], None] | None = None,
) -> SynthesisResult:
    """Smallest depth in ``[min_depth, max_depth]`` whose best circuit meets
    the exact or ``eps``-approximate acceptance test."""
    basis = Basis(basis)
    enc = EqEncoding.parse(enc) if isinstance(enc, str) else enc
    mode = Mode(mode)
    if mode is Mode.APPROX:
        if eps is None or not (0.0 < eps <= 1.0):
            raise ValueError("approximate mode needs 0 < eps <= 1")
        if enc is not EqEncoding.CYCLIC:
            raise EncodingError("approximate synthesis uses the cyclic encoding")
    if max_depth < 1 or min_depth < 1:
        raise ValueError("depth bounds must be at least 1")
    n = operator_width(spec)
    obj, norm, threshold = _targets(n, basis, enc, mode, eps)
    start = time.monotonic()
    result = SynthesisResult(False, None, None, 0.0, None, None)
    for d in range(min_depth, max_depth + 1):
        t0 = time.monotonic()
        syn = build_syn_formula(spec, gs, basis, enc, d, rules, r2_general)
        if dump_cnf:
            write_wcnf(syn.cnf, _dump_path(dump_cnf, d))
        remaining = None
        if time_limit is not None:
            remaining = time_limit - (time.monotonic() - start)
            if remaining <= 0:
                result.timed_out = True
                break
        try:
            mres = max_count(syn.cnf, obj, threshold, threads=threads, time_limit=remaining)
        except CounterTimeout:
            result.timed_out = True
            break
        raw = mres.best_count
        z = complex(raw)
        if basis is Basis.CB and enc is EqEncoding.CYCLIC:
            score_raw = abs(z)
            abs_norm = abs(z) / 2**n
        else:
            score_raw = z.real
            abs_norm = None
        entry = DepthLog(
            d,
            score_raw,
            mres.objective / norm,
            (time.monotonic() - t0) * 1000.0,
            syn.cnf.num_vars,
            syn.cnf.num_clauses,
            render_weight(raw),
            abs_norm,
            mres.threshold_hit,
        )
        result.log.append(entry)
        if on_depth is not None:
            on_depth(entry)
        log.info("depth %d: %s", d, entry.as_dict())
        best = decode_circuit(mres.best_assignment, syn.templates)
        result.best_circuits.append(best)
        if entry.score_norm > result.score or result.raw is None:
            result.score, result.raw = entry.score_norm, raw
        if not mres.threshold_hit:
            continue
        if mode is Mode.EXACT and _exact_target_met(raw, n, basis, enc) is False:
            raise SynthesisError("threshold reported at depth %d but count %s is not exact" % (d, render_weight(raw)))
        fid = jamiolkowski_fidelity(spec, best)
        if mode is Mode.EXACT:
            if not equal_up_to_phase(spec, best):
                raise SynthesisError("depth %d solution fails the oracle equivalence check" % d)
        elif fid < 1.0 - eps - 1e-9:
            raise SynthesisError("depth %d solution has oracle fidelity %.6f < %.6f" % (d, fid, 1.0 - eps))
        result.found = True
        result.circuit = best
        result.depth = d
        result.score = entry.score_norm
        result.raw = raw
        result.fidelity = fid
        return result
    return result


# -- random benchmarks --------------------------------------------------------------


def random_circuit(n: int, d: int, gs: GateSetSpec, rng: random.Random) -> Circuit:
    """Fill every layer with uniformly drawn non-identity gates; a two-qubit
    draw that no longer fits is redrawn."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be at least 1")
    pool = gs.non_identity()
    if not pool:
        raise ValueError("gate set has no non-identity gates")
    singles = [g for g in pool if GATES[g].arity == 1]
    layers = []
    for _ in range(d):
        free = list(range(n))
        layer = []
        while free:
            if len(free) == 1 and not singles:
                break
            name = rng.choice(pool)
            if GATES[name].arity == 1:
                q = free.pop(rng.randrange(len(free)))
                layer.append(Gate(name, (q,)))
            else:
                if len(free) < 2:
                    continue
                a = free.pop(rng.randrange(len(free)))
                b = free.pop(rng.randrange(len(free)))
                layer.append(Gate(name, (a, b)))
        layers.append(tuple(sorted(layer, key=lambda g: g.qubits)))
    return Circuit(n, layers)


def is_reducible(c: Circuit, gs: GateSetSpec = DEFAULT_GATES, rules: Iterable[Rule] = ALL_RULES, **kw) -> bool:
    """True when ``c`` is exactly synthesizable at a smaller depth."""
    if c.depth <= 1:
        return False
    res = synthesize(c, gs, Basis.CB, EqEncoding.CYCLIC, Mode.EXACT, max_depth=c.depth - 1, rules=rules, **kw)
    return res.found


def gen_random_benchmark(
    n: int,
    d: int,
    gs: GateSetSpec = DEFAULT_GATES,
    seed: int = 0,
    irreducible: bool = False,
    max_tries: int = 1000,
) -> Circuit:
    """Deterministic random circuit; with ``irreducible`` the first draw not
    synthesizable below depth ``d`` is returned."""
    rng = random.Random(seed)
    for _ in range(max_tries):
        c = random_circuit(n, d, gs, rng)
        if not irreducible or not is_reducible(c, gs):
            return c
    raise RuntimeError("no irreducible circuit found in %d draws" % max_tries)

