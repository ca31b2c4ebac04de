"""Weighted model counting and maximum weighted model counting.

The counter is an exhaustive DPLL search with unit propagation, connected
component decomposition and a component cache. Weights may be negative or
complex (exact ring elements or floats), so no bound-based pruning is ever
applied: every branch is either counted or cut by a conflict.

Max#SAT branches over the select variables first, in ascending index order
with ``False`` tried before ``True``. The depth-first visiting order is thus
the lexicographic order of select assignments, and the best assignment is
replaced only on a strictly better objective, which makes the reported
maximizer the lexicographically smallest one.
"""

from __future__ import annotations

import enum
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cnf import VarKind, WeightedCnf
from .weights import ONE, ZERO, ExactW, Weight

Clause = tuple[int, ...]

IMAG_TOL = 1e-9
THRESHOLD_TOL = 1e-9
TIE_TOL = 1e-12


class Objective(str, enum.Enum):
    REAL = "real"
    NORMSQ = "normsq"


class CounterError(RuntimeError):
    pass


class CounterTimeout(CounterError):
    pass


def objective_of(c: Weight, mode: Objective | str) -> float:
    """Real part (``real``) or squared modulus (``normsq``) of a count."""
    mode = Objective(mode)
    if mode is Objective.NORMSQ:
        if isinstance(c, ExactW):
            return complex(c.norm_sq()).real
        z = complex(c)
        return z.real * z.real + z.imag * z.imag
    if isinstance(c, ExactW):
        if not c.is_real():
            z = complex(c)
            if abs(z.imag) > IMAG_TOL:
                raise CounterError("count %s is not real" % c)
        return complex(c).real
    z = complex(c)
    if abs(z.imag) > IMAG_TOL:
        raise CounterError("count %r has an imaginary part" % z)
    return z.real


def _objective_exact(c: Weight, mode: Objective):
    """Exact comparable key when possible (a real ExactW), else a float."""
    if isinstance(c, ExactW):
        v = c.norm_sq() if mode is Objective.NORMSQ else c
        if v.is_real():
            return v
    return objective_of(c, mode)


def _exact_real_cmp(x: ExactW, y: ExactW) -> int:
    return (x - y).real_sign()


@dataclass
class CountStats:
    decisions: int = 0
    cache_hits: int = 0
    components: int = 0
    leaves: int = 0
    ub_prunes: int = 0
    elapsed_ms: float = 0.0

    def as_dict(self) -> dict:
        return {
            "decisions": self.decisions,
            "cache_hits": self.cache_hits,
            "components": self.components,
            "leaves": self.leaves,
            "ub_prunes": self.ub_prunes,
            "elapsed_ms": round(self.elapsed_ms, 3),
        }


@dataclass
class CountResult:
    count: Weight
    stats: CountStats


@dataclass
class MaxCountResult:
    best_assignment: dict[int, bool]
    best_count: Weight
    objective: float
    threshold_hit: bool
    stats: CountStats = field(default_factory=CountStats)


class ModelCounter:
    """Counts residual formulas of one :class:`WeightedCnf`.

    The component cache persists across calls on the same instance; it is
    keyed by residual clause sets, which is sound because literal weights are
    fixed per formula.
    """

    def __init__(self, f: WeightedCnf, deadline: float | None = None, decompose: bool = True):
        self.f = f
        self.decompose = decompose
        self.weights = f.weights
        self.cache: dict[frozenset, Weight] = {}
        self.stats = CountStats()
        self.deadline = deadline
        self.exact = f.is_exact()
        self.zero: Weight = ZERO if self.exact else 0j
        self.one: Weight = ONE if self.exact else 1 + 0j
        self._free: dict[int, Weight] = {}
        hint = getattr(f, "branch_hint", None) or []
        self.rank = {v: i for i, v in enumerate(hint)}

    # -- weights ---------------------------------------------------------------

    def lit_weight(self, lit: int) -> Weight:
        return self.weights.get(lit, ONE)

    def free_weight(self, var: int) -> Weight:
        w = self._free.get(var)
        if w is None:
            w = self.weights.get(var, ONE) + self.weights.get(-var, ONE)
            self._free[var] = w
        return w

    # -- propagation -------------------------------------------------------------

    @staticmethod
    def propagate(clauses: Sequence[Clause], units: Iterable[int]) -> tuple[list[Clause] | None, set[int]]:
        """Assert ``units`` and unit-propagate. Returns the residual clauses
        (None on conflict) and the set of literals made true."""
        true: set[int] = set()
        queue = []
        for u in units:
            if -u in true:
                return None, true
            if u not in true:
                true.add(u)
                queue.append(u)
        occ: dict[int, list[int]] = {}
        for idx, c in enumerate(clauses):
            if len(c) == 1:
                u = c[0]
                if -u in true:
                    return None, true
                if u not in true:
                    true.add(u)
                    queue.append(u)
            for l in c:
                occ.setdefault(l, []).append(idx)
        size = [len(c) for c in clauses]
        sat = [False] * len(clauses)
        qi = 0
        while qi < len(queue):
            lit = queue[qi]
            qi += 1
            for idx in occ.get(lit, ()):
                sat[idx] = True
            for idx in occ.get(-lit, ()):
                if sat[idx]:
                    continue
                size[idx] -= 1
                if size[idx] <= 1:
                    unit = None
                    for l in clauses[idx]:
                        if l in true:
                            unit = 0
                            break
                        if -l not in true:
                            unit = l
                    if unit == 0:
                        sat[idx] = True
                        continue
                    if unit is None:
                        return None, true
                    true.add(unit)
                    queue.append(unit)
                    sat[idx] = True
        out: list[Clause] = []
        for idx, c in enumerate(clauses):
            if sat[idx]:
                continue
            if any(l in true for l in c):
                continue
            rest = tuple(l for l in c if -l not in true)
            if not rest:
                return None, true
            out.append(rest)
        return out, true

    @staticmethod
    def components(clauses: Sequence[Clause]) -> list[list[Clause]]:
        """Variable-disjoint groups, ordered by their smallest variable."""
        parent: dict[int, int] = {}

        def find(v: int) -> int:
            root = v
            while parent[root] != root:
                root = parent[root]
            while parent[v] != root:
                parent[v], v = root, parent[v]
            return root

        for c in clauses:
            first = abs(c[0])
            parent.setdefault(first, first)
            r = find(first)
            for l in c[1:]:
                v = abs(l)
                parent.setdefault(v, v)
                rv = find(v)
                if rv != r:
                    if rv < r:
                        parent[r] = rv
                        r = rv
                    else:
                        parent[rv] = r
        groups: dict[int, list[Clause]] = {}
        for c in clauses:
            groups.setdefault(find(abs(c[0])), []).append(c)
        return [groups[k] for k in sorted(groups)]

    # -- counting ---------------------------------------------------------------

    def _check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise CounterTimeout("time limit reached")

    def _choose(self, clauses: Sequence[Clause]) -> int:
        rank = self.rank
        best_hint = None
        occ: dict[int, int] = {}
        for c in clauses:
            bonus = 4 if len(c) == 2 else 1
            for l in c:
                v = abs(l)
                occ[v] = occ.get(v, 0) + bonus
                r = rank.get(v)
                if r is not None and (best_hint is None or r < best_hint[0]):
                    best_hint = (r, v)
        if best_hint is not None:
            return best_hint[1]
        return max(sorted(occ), key=lambda v: occ[v])

    def count_residual(self, clauses: list[Clause]) -> Weight:
        """Weighted count over exactly the variables occurring in ``clauses``
        (which must be free of unit clauses after propagation)."""
        total = self.one
        comps = self.components(clauses) if self.decompose else [clauses]
        for comp in comps:
            self.stats.components += 1
            total = total * self._count_component(comp)
            if not total:
                return total
        return total

    def _count_component(self, clauses: list[Clause]) -> Weight:
        key = frozenset(clauses) if self.decompose else None
        hit = self.cache.get(key) if self.decompose else None
        if hit is not None:
            self.stats.cache_hits += 1
            return hit
        self._check_deadline()
        vars_ = {abs(l) for c in clauses for l in c}
        v = self._choose(clauses)
        total = self.zero
        for lit in (v, -v):
            self.stats.decisions += 1
            res, true = self.propagate(clauses, (lit,))
            if res is None:
                continue
            w = self.one
            for t in true:
                w = w * self.lit_weight(t)
            if not w:
                continue
            remaining = {abs(l) for c in res for l in c}
            assigned = {abs(t) for t in true}
            for u in vars_:
                if u not in remaining and u not in assigned:
                    w = w * self.free_weight(u)
            if res:
                w = w * self.count_residual(res)
            total = total + w
        if self.decompose:
            self.cache[key] = total
        return total

    def count_under(self, units: Iterable[int], over: Iterable[int] | None = None) -> Weight:
        """Count of the whole formula with ``units`` asserted; variables in
        ``over`` (default: all) that end up unconstrained contribute their
        free weight."""
        res, true = self.propagate(self.f.clauses, units)
        if res is None:
            return self.zero
        w = self.one
        for t in true:
            w = w * self.lit_weight(t)
        remaining = {abs(l) for c in res for l in c}
        assigned = {abs(t) for t in true}
        scope = range(1, self.f.num_vars + 1) if over is None else over
        for u in scope:
            if u not in remaining and u not in assigned:
                w = w * self.free_weight(u)
        if res and w:
            w = w * self.count_residual(res)
        return w


def count(f: WeightedCnf, time_limit: float | None = None, decompose: bool = True) -> CountResult:
    """Weighted model count over all variables of ``f``. ``decompose=False``
    disables component splitting and caching (plain DPLL)."""
    start = time.monotonic()
    deadline = start + time_limit if time_limit else None
    mc = ModelCounter(f, deadline, decompose)
    if any(len(c) == 0 for c in f.clauses):
        c = mc.zero
    else:
        c = mc.count_under(())
    mc.stats.elapsed_ms = (time.monotonic() - start) * 1000.0
    return CountResult(c, mc.stats)


# -- Max#SAT ----------------------------------------------------------------------


class _Search:
    """Depth-first Max#SAT over the select variables of one formula."""

    def __init__(
        self,
        f: WeightedCnf,
        mode: Objective,
        threshold: float | None,
        deadline: float | None,
    ):
        self.f = f
        self.mode = mode
        self.threshold = threshold
        self.mc = ModelCounter(f, deadline)
        self.select = sorted(f.select_vars)
        self.select_set = set(self.select)
        self.q_vars = [v for v in range(1, f.num_vars + 1) if v not in self.select_set]
        self.best: tuple | None = None  # (key, count, assignment)
        self.hit = False

    def better(self, key, other) -> bool:
        if isinstance(key, ExactW) and isinstance(other, ExactW):
            return _exact_real_cmp(key, other) > 0
        return float(complex(key).real) > float(complex(other).real) + TIE_TOL * max(1.0, abs(complex(other).real))

    def reaches(self, key) -> bool:
        if self.threshold is None:
            return False
        return complex(key).real >= self.threshold - THRESHOLD_TOL

    def leaf(self, clauses: list[Clause], true: set[int]) -> None:
        mc = self.mc
        mc.stats.leaves += 1
        w = mc.one
        assigned = set()
        for t in true:
            assigned.add(abs(t))
            if abs(t) not in self.select_set:
                w = w * mc.lit_weight(t)
        remaining = {abs(l) for c in clauses for l in c}
        for u in self.q_vars:
            if u not in remaining and u not in assigned:
                w = w * mc.free_weight(u)
        if clauses and w:
            w = w * mc.count_residual(clauses)
        assignment = {v: (v in true) for v in self.select}
        key = _objective_exact(w, self.mode)
        if self.best is None or self.better(key, self.best[0]):
            self.best = (key, w, assignment)
        if self.reaches(key):
            self.best = (key, w, assignment)
            self.hit = True

    def conflict(self, true: set[int]) -> None:
        # every completion is UNSAT: a zero-count candidate, completed with False
        assignment = {v: (v in true) for v in self.select}
        w = self.mc.zero
        key = _objective_exact(w, self.mode)
        if self.best is None or self.better(key, self.best[0]):
            self.best = (key, w, assignment)
        if self.reaches(key):
            self.best = (key, w, assignment)
            self.hit = True

    def run(self, prefix: Sequence[bool] = ()) -> None:
        units = [v if b else -v for v, b in zip(self.select, prefix)]
        res, true = ModelCounter.propagate(self.f.clauses, units)
        if res is None:
            self.conflict({u for u in units if u > 0})
            return
        self._dfs(len(prefix), res, true)

    def _dfs(self, i: int, clauses: list[Clause], true: set[int]) -> None:
        select = self.select
        if i == len(select):
            self.leaf(clauses, true)
            return
        v = select[i]
        # a forced select literal still has a refuted branch, which is a
        # zero-count candidate in its lexicographic position
        if v in true:
            self.conflict({u for u in select[:i] if u in true})
            if not self.hit:
                self._dfs(i + 1, clauses, true)
            return
        if -v in true:
            self._dfs(i + 1, clauses, true)
            if not self.hit:
                self.conflict({u for u in select[:i] if u in true} | {v})
            return
        self.mc._check_deadline()
        if not any(abs(l) == v for c in clauses for l in c):
            # unconstrained select variable: False is the lexicographic choice
            self._dfs(i + 1, clauses, true | {-v})
            return
        for lit in (-v, v):
            self.mc.stats.decisions += 1
            res, t2 = ModelCounter.propagate(clauses, (lit,))
            if res is None:
                self.conflict({u for u in select[:i] if u in true} | ({lit} if lit > 0 else set()))
                if self.hit:
                    return
                continue
            self._dfs(i + 1, res, true | t2)
            if self.hit:
                return

    def result(self) -> MaxCountResult:
        if self.best is None:
            return MaxCountResult({v: False for v in self.select}, self.mc.zero, 0.0, False, self.mc.stats)
        key, w, assignment = self.best
        return MaxCountResult(assignment, w, objective_of(w, self.mode), self.hit, self.mc.stats)


def _prefixes(f: WeightedCnf, parts: int) -> list[tuple[bool, ...]]:
    """Select-assignment prefixes in lexicographic order, expanded until there
    are at least ``parts`` of them (or the select set runs out). Refuted
    prefixes are kept unexpanded: they are zero-count candidates."""
    select = sorted(f.select_vars)
    frontier: list[tuple[tuple[bool, ...], bool]] = [((), True)]
    depth = 0
    while len(frontier) < parts and depth < len(select):
        nxt = []
        for p, live in frontier:
            if not live:
                nxt.append((p, live))
                continue
            for b in (False, True):
                cand = p + (b,)
                units = [v if x else -v for v, x in zip(select, cand)]
                res, _ = ModelCounter.propagate(f.clauses, units)
                nxt.append((cand, res is not None))
        frontier = nxt
        depth += 1
    return [p for p, _ in frontier]


def _run_partition(args) -> tuple[MaxCountResult, bool]:
    f, mode, threshold, deadline, prefix = args
    s = _Search(f, Objective(mode), threshold, deadline)
    s.run(prefix)
    return s.result(), s.best is not None


def default_threads() -> int:
    env = os.environ.get("MAXSYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def max_count(
    f: WeightedCnf,
    mode: Objective | str = Objective.REAL,
    threshold: float | None = None,
    threads: int = 1,
    time_limit: float | None = None,
) -> MaxCountResult:
    """Select assignment maximizing the objective of the count over the
    remaining variables. With a threshold the search stops at the first
    assignment (in lexicographic order) whose objective reaches it."""
    mode = Objective(mode)
    start = time.monotonic()
    deadline = start + time_limit if time_limit else None
    if threads <= 1 or len(f.select_vars) < 2:
        s = _Search(f, mode, threshold, deadline)
        if not any(len(c) == 0 for c in f.clauses):
            s.run()
        out = s.result()
    else:
        out = _parallel_max(f, mode, threshold, deadline, threads)
    out.stats.elapsed_ms = (time.monotonic() - start) * 1000.0
    return out


def _parallel_max(f, mode, threshold, deadline, threads) -> MaxCountResult:
    if any(len(c) == 0 for c in f.clauses):
        return _Search(f, mode, threshold, deadline).result()
    prefixes = _prefixes(f, 4 * threads)
    jobs = [(f, mode.value, threshold, deadline, p) for p in prefixes]
    merged = _Search(f, mode, threshold, deadline)
    stats = CountStats()
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(_run_partition, jobs))
    chosen: MaxCountResult | None = None
    best_key = None
    for res, found in results:
        for name in ("decisions", "cache_hits", "components", "leaves", "ub_prunes"):
            setattr(stats, name, getattr(stats, name) + getattr(res.stats, name))
        if not found:
            continue
        if res.threshold_hit:
            chosen = res
            break
        key = _objective_exact(res.best_count, mode)
        if chosen is None or merged.better(key, best_key):
            chosen, best_key = res, key
    if chosen is None:
        chosen = merged.result()
    chosen.stats = stats
    return chosen
