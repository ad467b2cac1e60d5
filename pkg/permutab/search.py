"""Bounded model finder over operation tables.

Tables are filled one cell at a time (constants first, then the other symbols
in signature order, row-major) with values in increasing order; identities are
evaluated on the partial tables after every assignment, unknown entries
propagating as ``-1``. The walk is deterministic, so the models emitted under a
node cap are always a prefix of the models emitted under a larger cap.
"""

from __future__ import annotations

import itertools
import logging
import re
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from .algebra import Algebra, Identity, Signature, Term, Var, generated_subuniverse
from .config import Limits
from .errors import CapExceeded, PermutabError
from .maltsev import congruence_permutability_check
from .paperlab import MonoidStructure
from .parallel import ordered_map
from .relcalc import enumerate_compatible, properties
from .report import Report, Status

__all__ = [
    "PREDICATES",
    "SearchSpec",
    "Enumeration",
    "ModelSearch",
    "parse_predicate",
    "enumerate_models",
    "find_model",
    "evaluate_predicate",
    "internal_monoids",
    "canonical_form",
]

PREDICATES = (
    "none",
    "has-noncongruence-preorder",
    "has-nonpermuting-congruence-pair",
    "has-internal-monoid",
)

_PREDICATE = re.compile(r"([a-z-]+)(?:\((\d+)\))?")


def parse_predicate(text: str) -> Tuple[str, Optional[int]]:
    """``"has-nonpermuting-congruence-pair(3)"`` -> ``("has-nonpermuting-congruence-pair", 3)``."""
    match = _PREDICATE.fullmatch(text.strip())
    if match is None or match.group(1) not in PREDICATES:
        raise PermutabError(f"unknown predicate {text!r}; expected one of {PREDICATES}")
    name, raw = match.group(1), match.group(2)
    if name == "has-nonpermuting-congruence-pair":
        if raw is None or int(raw) < 2:
            raise PermutabError(f"{name} needs a parameter n >= 2, e.g. {name}(2)")
        return name, int(raw)
    if raw is not None:
        raise PermutabError(f"predicate {name} takes no parameter")
    return name, None


@dataclass(frozen=True)
class SearchSpec:
    signature: Signature
    identities: Tuple[Identity, ...] = ()
    sizes: Tuple[int, int] = (1, 1)
    predicate: str = "none"
    limits: Limits = field(default_factory=Limits)
    dedup: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "identities", tuple(self.identities))
        lo, hi = (int(v) for v in self.sizes)
        if lo < 1 or hi < lo:
            raise PermutabError(f"size range must satisfy 1 <= lo <= hi, got {lo}..{hi}")
        object.__setattr__(self, "sizes", (lo, hi))
        parse_predicate(self.predicate)
        for identity in self.identities:
            identity.validate(self.signature)


@dataclass(frozen=True)
class Enumeration:
    """Models in emission order; ``complete`` is False when a limit stopped the walk."""

    models: Tuple[Algebra, ...]
    complete: bool
    reason: Optional[str] = None
    counts: Tuple[Tuple[int, int, int], ...] = ()  # (size, models, nodes)

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.counts), columns=["size", "models", "nodes"])

    def to_report(self) -> Report:
        message = ", ".join(f"size {s}: {m} models" for s, m, _ in self.counts)
        if self.complete:
            return Report.passed("enumerate-models", message)
        return Report.inconclusive("enumerate-models", f"{message}; partial: {self.reason}")


@dataclass(frozen=True)
class ModelSearch:
    outcome: str  # "found", "none" or "inconclusive"
    model: Optional[Algebra] = None
    witness: Optional[Dict[str, Any]] = None
    exhausted_sizes: Tuple[int, ...] = ()
    reason: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.outcome == "found"

    def to_report(self) -> Report:
        exhausted = list(self.exhausted_sizes)
        if self.found:
            assert self.model is not None
            witness = {"size": self.model.size, "exhausted_sizes": exhausted, **(self.witness or {})}
            return Report(
                "find-model", Status.HOLDS, witness=witness, message=f"model of size {self.model.size}",
                labels=self.model.labels,
            )
        if self.outcome == "none":
            return Report.failed("find-model", {"exhausted_sizes": exhausted}, "none within bounds")
        return Report.inconclusive("find-model", f"limit hit: {self.reason}; exhausted sizes {exhausted}")


# ---- partial evaluation ------------------------------------------------------ #


def _partial_apply(table: np.ndarray, args: Sequence[np.ndarray]) -> np.ndarray:
    """Apply ``table`` pointwise; ``-1`` in an argument or a table cell yields ``-1``."""
    unknown = np.zeros(np.shape(args[0]), dtype=bool)
    for arg in args:
        unknown |= arg < 0
    safe = tuple(np.where(unknown, 0, arg) for arg in args)
    return np.where(unknown, -1, table[safe])


def _partial_term(term: Term, tables: Dict[str, np.ndarray], grids: Sequence[np.ndarray], count: int) -> np.ndarray:
    if isinstance(term, Var):
        return grids[term.index]
    table = tables[term.symbol]
    if not term.args:
        return np.full(count, table[()], dtype=np.int64)
    return _partial_apply(table, [_partial_term(arg, tables, grids, count) for arg in term.args])


def _conflict(lhs: np.ndarray, rhs: np.ndarray) -> bool:
    return bool(((lhs >= 0) & (rhs >= 0) & (lhs != rhs)).any())


class _TableWalk:
    def __init__(self, signature: Signature, identities: Sequence[Identity], size: int) -> None:
        self.signature = signature
        self.size = size
        self.tables: Dict[str, np.ndarray] = {
            name: np.full((size,) * arity, -1, dtype=np.int64) for name, arity in signature
        }
        ordered = [s for s in signature if s[1] == 0] + [s for s in signature if s[1] > 0]
        self.cells = [
            (name, args) for name, arity in ordered for args in itertools.product(range(size), repeat=arity)
        ]
        self.checks = []
        for identity in identities:
            grids = [g.reshape(-1) for g in np.indices((size,) * identity.nvars, dtype=np.int64)]
            self.checks.append((identity, grids, size ** identity.nvars))

    def violated(self) -> bool:
        for identity, grids, count in self.checks:
            lhs = _partial_term(identity.lhs, self.tables, grids, count)
            rhs = _partial_term(identity.rhs, self.tables, grids, count)
            if _conflict(lhs, rhs):
                return True
        return False

    def algebra(self) -> Algebra:
        return Algebra(self.size, self.signature, tuple(self.tables[name].copy() for name in self.signature.names))

    def run(self, budget: int, deadline: Optional[float], dedup: bool) -> Tuple[List[Tuple[int, Algebra]], int, Optional[str]]:
        emitted: List[Tuple[int, Algebra]] = []
        seen: Set[Tuple[Any, ...]] = set()
        state = {"nodes": 0, "stopped": None}

        def visit(k: int) -> bool:
            if k == len(self.cells):
                alg = self.algebra()
                if dedup:
                    key = canonical_form(alg)
                    if key in seen:
                        return True
                    seen.add(key)
                emitted.append((state["nodes"], alg))
                return True
            name, args = self.cells[k]
            table = self.tables[name]
            for value in range(self.size):
                state["nodes"] += 1
                if state["nodes"] > budget:
                    state["stopped"] = "cap"
                    table[args] = -1
                    return False
                if deadline is not None and time.monotonic() > deadline:
                    state["stopped"] = "time"
                    table[args] = -1
                    return False
                table[args] = value
                if not self.violated() and not visit(k + 1):
                    table[args] = -1
                    return False
            table[args] = -1
            return True

        visit(0)
        return emitted, int(state["nodes"]), state["stopped"]  # type: ignore[return-value]


_WalkTask = Tuple[Signature, Tuple[Identity, ...], int, int, Optional[float], bool]
_WalkResult = Tuple[int, List[Tuple[int, Algebra]], int, Optional[str]]


def _walk_size(task: _WalkTask) -> _WalkResult:
    signature, identities, size, budget, deadline, dedup = task
    emitted, nodes, stopped = _TableWalk(signature, identities, size).run(budget, deadline, dedup)
    logging.debug("size %d: %d models, %d nodes%s", size, len(emitted), nodes, f" ({stopped})" if stopped else "")
    return size, emitted, nodes, stopped


# ---- enumeration ---------------------------------------------------------------- #


def enumerate_models(spec: SearchSpec) -> Enumeration:
    """All models in the size range, in deterministic order, or a marked prefix."""
    limits = spec.limits
    cap = limits.search_candidate_cap
    deadline = time.monotonic() + limits.search_time_budget if limits.search_time_budget else None
    sizes = list(range(spec.sizes[0], spec.sizes[1] + 1))

    # Parallel walks each get the whole cap and are cut back to the shared budget on merge.
    precomputed: Dict[int, _WalkResult] = {}
    if limits.workers > 1:
        tasks = [(spec.signature, spec.identities, n, cap, deadline, spec.dedup) for n in sizes]
        precomputed = {walk[0]: walk for walk in ordered_map(_walk_size, tasks, limits.workers)}

    models: List[Algebra] = []
    counts: List[Tuple[int, int, int]] = []
    used = 0
    for n in sizes:
        remaining = cap - used
        if n in precomputed:
            _, emitted, nodes, stopped = precomputed[n]
        else:
            _, emitted, nodes, stopped = _walk_size(
                (spec.signature, spec.identities, n, remaining, deadline, spec.dedup)
            )
        kept = [alg for index, alg in emitted if index <= remaining]
        models.extend(kept)
        counts.append((n, len(kept), min(nodes, remaining)))
        if nodes > remaining:
            return Enumeration(tuple(models), False, f"candidate cap {cap} reached at size {n}", tuple(counts))
        if stopped == "time":
            return Enumeration(tuple(models), False, f"time budget {limits.search_time_budget}s at size {n}",
                               tuple(counts))
        used += nodes
    logging.info("enumerate_models: %d models over sizes %s..%s", len(models), *spec.sizes)
    return Enumeration(tuple(models), True, None, tuple(counts))


def evaluate_predicate(alg: Algebra, predicate: str, limits: Optional[Limits] = None) -> Optional[Dict[str, Any]]:
    """Witness of ``predicate`` on ``alg``, or None when it does not hold."""
    name, n = parse_predicate(predicate)
    if name == "none":
        return {}
    if name == "has-noncongruence-preorder":
        for r in enumerate_compatible(alg, "preorder", limits):
            if not properties(r).symmetric:
                return {"witness_relation": r.pairs}
        return None
    if name == "has-nonpermuting-congruence-pair":
        verdict = congruence_permutability_check(alg, n or 2, limits)
        return None if verdict.holds else dict(verdict.witness or {})
    monoids = internal_monoids(alg)
    if not monoids:
        return None
    return {"unit": monoids[0].unit, "plus": monoids[0].plus.tolist()}


def find_model(spec: SearchSpec) -> ModelSearch:
    """First model (in emission order) satisfying the predicate, with its witness."""
    enumeration = enumerate_models(spec)
    walked = [size for size, _, _ in enumeration.counts]
    finished = walked if enumeration.complete else walked[:-1]
    current = spec.sizes[0]
    try:
        for alg in enumeration.models:
            current = alg.size
            witness = evaluate_predicate(alg, spec.predicate, spec.limits)
            if witness is not None:
                logging.info("find_model: %s holds on a model of size %d", spec.predicate, alg.size)
                exhausted = tuple(size for size in finished if size < alg.size)
                return ModelSearch("found", alg, witness, exhausted)
    except CapExceeded as exc:
        return ModelSearch("inconclusive", exhausted_sizes=tuple(s for s in finished if s < current), reason=str(exc))
    if not enumeration.complete:
        return ModelSearch("inconclusive", exhausted_sizes=tuple(finished), reason=enumeration.reason)
    return ModelSearch("none", exhausted_sizes=tuple(finished))


# ---- internal monoids ------------------------------------------------------------ #


def _monoid_conflict(plus: np.ndarray, alg: Algebra) -> bool:
    n = alg.size
    x, y, z = (g.reshape(-1) for g in np.indices((n, n, n), dtype=np.int64))
    left = _partial_apply(plus, [_partial_apply(plus, [x, y]), z])
    right = _partial_apply(plus, [x, _partial_apply(plus, [y, z])])
    if _conflict(left, right):
        return True
    for (_, arity), table in zip(alg.signature, alg.tables):
        if arity == 0:
            c = int(table[()])
            if plus[c, c] >= 0 and plus[c, c] != c:
                return True
            continue
        grid = [g.reshape(-1) for g in np.indices((n,) * (2 * arity), dtype=np.int64)]
        xs, ys = grid[:arity], grid[arity:]
        lhs = _partial_apply(plus, [table[tuple(xs)], table[tuple(ys)]])
        rhs = _partial_apply(table, [_partial_apply(plus, [a, b]) for a, b in zip(xs, ys)])
        if _conflict(lhs, rhs):
            return True
    return False


def internal_monoids(alg: Algebra) -> List[MonoidStructure]:
    """Every ``(plus, unit)`` making ``alg`` an internal monoid.

    The unit must be a one-element subalgebra and ``plus`` an associative,
    unital homomorphism ``alg × alg → alg``. Results are ordered by unit, then
    by the row-major addition table.
    """
    n = alg.size
    found: List[MonoidStructure] = []
    for unit in range(n):
        if generated_subuniverse(alg, [unit]) != frozenset({unit}):
            continue
        plus = np.full((n, n), -1, dtype=np.int64)
        plus[unit, :] = np.arange(n)
        plus[:, unit] = np.arange(n)
        cells = [(a, b) for a, b in itertools.product(range(n), repeat=2) if plus[a, b] < 0]

        def visit(k: int) -> None:
            if k == len(cells):
                found.append(MonoidStructure(n, plus.copy(), unit))
                return
            for value in range(n):
                plus[cells[k]] = value
                if not _monoid_conflict(plus, alg):
                    visit(k + 1)
            plus[cells[k]] = -1

        if not _monoid_conflict(plus, alg):
            visit(0)
    logging.debug("internal_monoids: %d on %r", len(found), alg)
    return found


def canonical_form(alg: Algebra) -> Tuple[Tuple[int, ...], ...]:
    """Least flattened table tuple over carrier permutations fixing every constant."""
    fixed = set(alg.constant_values())
    best: Optional[Tuple[Tuple[int, ...], ...]] = None
    for perm in itertools.permutations(range(alg.size)):
        if any(perm[c] != c for c in fixed):
            continue
        p = np.array(perm, dtype=np.int64)
        inverse = np.argsort(p)
        key = tuple(
            tuple(int(v) for v in p[table[np.ix_(*([inverse] * table.ndim))]].reshape(-1))
            for table in alg.tables
        )
        if best is None or key < best:
            best = key
    assert best is not None
    return best
