import itertools
import random

import numpy as np
import pytest

from maxsyn.circuit import Circuit, Gate
from maxsyn.cnf import VarKind, WeightedCnf
from maxsyn.weights import ONE, ZERO, ExactW


def brute_force_count(f: WeightedCnf, fixed: dict | None = None):
    """Sum of literal-weight products over every satisfying total assignment."""
    fixed = fixed or {}
    free = [v for v in range(1, f.num_vars + 1) if v not in fixed]
    exact = f.is_exact()
    total = ZERO if exact else 0j
    for bits in itertools.product((False, True), repeat=len(free)):
        val = dict(fixed)
        val.update(zip(free, bits))
        if all(any(val[abs(l)] == (l > 0) for l in c) for c in f.clauses):
            w = ONE if exact else 1 + 0j
            for v in range(1, f.num_vars + 1):
                w = w * f.weight(v if val[v] else -v)
            total = total + w
    return total


def random_exact(rng: random.Random, span: int = 3, kmax: int = 3) -> ExactW:
    return ExactW(*(rng.randint(-span, span) for _ in range(4)), rng.randint(0, kmax))


def random_formula(rng: random.Random, nvars: int, nclauses: int, nselect: int = 0, weighted: float = 0.5, exact=True):
    f = WeightedCnf()
    if nselect:
        f.fresh_vars(VarKind.SELECT, nselect)
    f.fresh_vars(VarKind.AUX, nvars - nselect)
    for v in range(nselect + 1, nvars + 1):
        if rng.random() < weighted:
            if exact:
                f.set_weight(v, random_exact(rng), random_exact(rng))
            else:
                f.set_weight(v, complex(rng.uniform(-2, 2), rng.uniform(-2, 2)), complex(rng.uniform(-2, 2), 0.3))
    for _ in range(nclauses):
        k = rng.randint(1, min(3, nvars))
        vs = rng.sample(range(1, nvars + 1), k)
        f.add_clause([v if rng.random() < 0.5 else -v for v in vs])
    return f


ONE_QUBIT = ["H", "S", "T", "TDG"]


def random_circuit(rng: random.Random, n: int, depth: int, names=("H", "S", "T", "TDG", "CX")) -> Circuit:
    layers = []
    for _ in range(depth):
        free = list(range(n))
        rng.shuffle(free)
        layer = []
        while free:
            name = rng.choice(names)
            if name in ("CX", "CZ"):
                if len(free) < 2:
                    continue
                layer.append(Gate(name, (free.pop(), free.pop())))
            elif name == "RZ":
                layer.append(Gate(name, (free.pop(),), theta=rng.uniform(-np.pi, np.pi)))
            else:
                layer.append(Gate(name, (free.pop(),)))
        layers.append(tuple(layer))
    return Circuit(n, layers)


@pytest.fixture
def rng():
    return random.Random(12345)


_INVERSE = {"H": "H", "S": "SDG", "SDG": "S", "T": "TDG", "TDG": "T", "CX": "CX"}


def insert_identity(rng: random.Random, c: Circuit) -> Circuit:
    """Equivalent circuit: a gate and its inverse inserted as two adjacent
    layers at a random position, on random qubits."""
    name = rng.choice(list(_INVERSE) if c.n >= 2 else [k for k in _INVERSE if k != "CX"])
    qs = tuple(rng.sample(range(c.n), 2 if name == "CX" else 1))
    pos = rng.randint(0, c.depth)
    layers = list(c.layers)
    layers[pos:pos] = [(Gate(name, qs),), (Gate(_INVERSE[name], qs),)]
    return Circuit(c.n, layers)


def random_pair(rng: random.Random, n: int, depth: int, equivalent: bool, names=("H", "S", "T", "TDG", "CX")):
    a = random_circuit(rng, n, depth, names)
    if equivalent:
        b = a
        for _ in range(rng.randint(1, 2)):
            b = insert_identity(rng, b)
        return a, b
    return a, random_circuit(rng, n, depth, names)


def enumerate_count(f: WeightedCnf, fixed: dict | None = None):
    """Same quantity as :func:`brute_force_count`, vectorized: every total
    assignment is tested with numpy, and satisfying ones are tallied per
    pattern of the weighted variables before the exact weight sum."""
    fixed = fixed or {}
    nv = f.num_vars
    exact = f.is_exact()
    free = [v for v in range(1, nv + 1) if v not in fixed]
    rows = 1 << len(free)
    val = np.zeros((rows, nv + 1), dtype=bool)
    idx = np.arange(rows)
    for k, v in enumerate(free):
        val[:, v] = (idx >> k) & 1
    for v, b in fixed.items():
        val[:, v] = b
    sat = np.ones(rows, dtype=bool)
    for c in f.clauses:
        cs = np.zeros(rows, dtype=bool)
        for l in c:
            cs |= val[:, abs(l)] if l > 0 else ~val[:, abs(l)]
        sat &= cs
    weighted = sorted({abs(l) for l in f.weights})
    pattern = np.zeros(rows, dtype=np.int64)
    for k, v in enumerate(weighted):
        pattern |= val[:, v].astype(np.int64) << k
    tally = np.bincount(pattern[sat], minlength=1 << len(weighted))
    total = ZERO if exact else 0j
    for pat, cnt in enumerate(tally):
        if not cnt:
            continue
        w = ONE if exact else 1 + 0j
        for k, v in enumerate(weighted):
            w = w * f.weight(v if (pat >> k) & 1 else -v)
        total = total + w * int(cnt)
    return total


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
