"""n-permutability: congruence permutation, Hagemann's relational conditions,
and Hagemann–Mitschke terms found inside the ternary clone.

The ternary clone of a finite algebra is saturated as the subalgebra of
``A^(A³)`` generated by the three projections; every element is a table of
``size³`` entries indexed ``x*size² + y*size + z``.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import Algebra, App, Identity, Signature, Term, Var, check_identities, format_term
from .config import Limits
from .errors import CapExceeded, InconsistencyError, PermutabError, SizeMismatch
from .parallel import ordered_map
from .relcalc import (
    BinRelation,
    compose,
    converse,
    enumerate_compatible,
    properties,
    relation_power,
)
from .report import Report, Severity, Status

__all__ = [
    "TermOperation",
    "PermutabilityVerdict",
    "HMSearch",
    "DegreeResult",
    "theta_names",
    "perm_identities",
    "perm_algebra",
    "alternating_composite",
    "pair_permutes_at",
    "hagemann_check",
    "congruence_permutability_check",
    "ternary_clone",
    "find_hm_terms",
    "permutability_degree",
    "cross_validate",
]

CHUNK_TUPLES = 32768


@dataclass(frozen=True, eq=False)
class TermOperation:
    """A tabulated finitary operation, optionally with a term producing it."""

    size: int
    arity: int
    table: np.ndarray
    provenance: Optional[Term] = None

    def __post_init__(self) -> None:
        table = np.array(self.table, dtype=np.int64).reshape(-1)
        if table.size != self.size ** self.arity:
            raise SizeMismatch(f"operation table needs {self.size ** self.arity} entries, got {table.size}")
        if table.size and (table.min() < 0 or table.max() >= self.size):
            raise PermutabError("operation table has entries outside the carrier")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def __call__(self, *args: int) -> int:
        index = 0
        for a in args:
            index = index * self.size + a
        return int(self.table[index])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TermOperation)
            and (self.size, self.arity) == (other.size, other.arity)
            and bool(np.array_equal(self.table, other.table))
        )

    def __hash__(self) -> int:
        return hash((self.size, self.arity, self.table.tobytes()))

    def describe(self) -> str:
        return format_term(self.provenance) if self.provenance is not None else "<table>"


@dataclass(frozen=True)
class PermutabilityVerdict:
    n: int
    status: Status
    witness: Optional[Dict[str, object]] = None
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.status is Status.FAILS and self.witness is None:
            raise InconsistencyError("a failing verdict must carry a witness")

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    def to_report(self, check: str) -> Report:
        return Report(check, self.status, witness=self.witness, message=f"n={self.n}", labels=self.labels)


@dataclass(frozen=True)
class HMSearch:
    """Outcome of a Hagemann–Mitschke search: ``found``, ``none`` or ``inconclusive``."""

    n: int
    outcome: str
    chain: Tuple[TermOperation, ...] = ()
    clone_size: int = 0
    message: str = ""

    @property
    def found(self) -> bool:
        return self.outcome == "found"

    def to_report(self, labels: Optional[Tuple[str, ...]] = None) -> Report:
        check = "hm-terms"
        if self.outcome == "found":
            witness = {"terms": [op.describe() for op in self.chain], "tables": [op.table.tolist() for op in self.chain]}
            return Report(check, Status.HOLDS, witness=witness, message=f"n={self.n}", labels=labels)
        if self.outcome == "none":
            return Report(check, Status.FAILS, witness={"clone_size": self.clone_size},
                          message=f"no chain for n={self.n} in the saturated clone", labels=labels)
        return Report.inconclusive(check, self.message or "clone cap exceeded", labels=labels)


@dataclass(frozen=True)
class DegreeResult:
    max_n: int
    degree: Optional[int]
    outcome: str  # "found", "none" or "inconclusive"
    chain: Tuple[TermOperation, ...] = ()

    def to_report(self, labels: Optional[Tuple[str, ...]] = None) -> Report:
        if self.outcome == "found":
            witness = {"degree": self.degree, "terms": [op.describe() for op in self.chain]}
            return Report("degree", Status.HOLDS, witness=witness, message=f"{self.degree}-permutable", labels=labels)
        if self.outcome == "none":
            return Report("degree", Status.FAILS, witness={"max_n": self.max_n},
                          message=f"none up to {self.max_n}", labels=labels)
        return Report.inconclusive("degree", f"clone cap exceeded before n={self.max_n}", labels=labels)


# ---- the n-permutability schema ----------------------------------------- #


def theta_names(n: int) -> Tuple[str, ...]:
    return tuple(f"theta{i}" for i in range(1, n))


def perm_identities(n: int) -> Tuple[Signature, Tuple[Identity, ...]]:
    """θ1(s,t,t)=s, θi(s,s,t)=θi+1(s,t,t), θn-1(s,s,t)=t over symbols theta1..theta{n-1}."""
    if n < 2:
        raise PermutabError(f"n-permutability needs n >= 2, got {n}")
    names = theta_names(n)
    signature = Signature(tuple((name, 3) for name in names))
    s, t = Var(0), Var(1)
    ids: List[Identity] = [Identity(2, App(names[0], (s, t, t)), s, ("s", "t"))]
    for i in range(n - 2):
        ids.append(Identity(2, App(names[i], (s, s, t)), App(names[i + 1], (s, t, t)), ("s", "t")))
    ids.append(Identity(2, App(names[-1], (s, s, t)), t, ("s", "t")))
    return signature, tuple(ids)


def perm_algebra(size: int, chain: Sequence[TermOperation], labels: Optional[Sequence[str]] = None) -> Algebra:
    """Install ternary operations as theta1..theta{k} on a carrier of ``size``."""
    names = theta_names(len(chain) + 1)
    signature = Signature(tuple((name, 3) for name in names))
    for op in chain:
        if op.arity != 3 or op.size != size:
            raise SizeMismatch("perm algebras need ternary operations on the same carrier")
    return Algebra(size, signature, tuple(op.table for op in chain), tuple(labels) if labels else None)


# ---- congruence permutation ------------------------------------------------- #


def alternating_composite(r: BinRelation, s: BinRelation, n: int) -> BinRelation:
    """``r s r s …`` with ``n`` factors."""
    result = r
    for k in range(1, n):
        result = compose(result, s if k % 2 else r)
    return result


def pair_permutes_at(r: BinRelation, s: BinRelation, n: int) -> PermutabilityVerdict:
    if n < 2:
        raise PermutabError(f"n must be at least 2, got {n}")
    if r.size != s.size:
        raise SizeMismatch("relations on different carriers")
    left = alternating_composite(r, s, n)
    right = alternating_composite(s, r, n)
    diff = np.argwhere(left.matrix != right.matrix)
    if len(diff) == 0:
        return PermutabilityVerdict(n, Status.HOLDS)
    x, y = (int(v) for v in diff[0])
    witness = {
        "pair": [x, y],
        "in": "rs..." if left.matrix[x, y] else "sr...",
        "r": r.pairs,
        "s": s.pairs,
    }
    return PermutabilityVerdict(n, Status.FAILS, witness)


def hagemann_check(alg: Algebra, n: int, limits: Optional[Limits] = None) -> PermutabilityVerdict:
    """R° ≤ R^(n-1) and R^n ≤ R^(n-1) for every compatible reflexive relation R on ``alg``."""
    if n < 2:
        raise PermutabError(f"n must be at least 2, got {n}")
    for r in enumerate_compatible(alg, "reflexive", limits):
        lower = relation_power(r, n - 1)
        for condition, candidate in (("converse", converse(r)), ("power", relation_power(r, n))):
            excess = np.argwhere(candidate.matrix & ~lower.matrix)
            if len(excess):
                pair = [int(v) for v in excess[0]]
                witness = {"relation": r.pairs, "condition": condition, "pair": pair}
                logging.debug("hagemann_check(n=%d) fails: %s", n, witness)
                return PermutabilityVerdict(n, Status.FAILS, witness, alg.labels)
    return PermutabilityVerdict(n, Status.HOLDS, labels=alg.labels)


def congruence_permutability_check(alg: Algebra, n: int, limits: Optional[Limits] = None) -> PermutabilityVerdict:
    if n < 2:
        raise PermutabError(f"n must be at least 2, got {n}")
    congruences = enumerate_compatible(alg, "equivalence", limits)
    for r, s in itertools.product(congruences, repeat=2):
        verdict = pair_permutes_at(r, s, n)
        if not verdict.holds:
            return PermutabilityVerdict(n, Status.FAILS, verdict.witness, alg.labels)
    return PermutabilityVerdict(n, Status.HOLDS, labels=alg.labels)


# ---- ternary clone ---------------------------------------------------------- #


def _tuples_with_new(count: int, start: int, arity: int) -> Iterator[np.ndarray]:
    """Index tuples over ``range(count)`` (lexicographic) with at least one index >= start."""
    if arity == 1:
        if start < count:
            yield np.arange(start, count).reshape(-1, 1)
        return
    rest = np.indices((count,) * (arity - 1)).reshape(arity - 1, -1).T
    rest_has_new = rest.max(axis=1) >= start
    for lead in range(count):
        block = rest if lead >= start else rest[rest_has_new]
        if len(block) == 0:
            continue
        for lo in range(0, len(block), CHUNK_TUPLES):
            part = block[lo:lo + CHUNK_TUPLES]
            yield np.hstack([np.full((len(part), 1), lead), part])


def _apply_chunk(task: Tuple[np.ndarray, np.ndarray, np.ndarray]) -> np.ndarray:
    table, elements, index = task
    return table[tuple(elements[index[:, j]] for j in range(index.shape[1]))]


@dataclass(frozen=True)
class Clone:
    size: int
    operations: Tuple[TermOperation, ...]

    def __len__(self) -> int:
        return len(self.operations)


@lru_cache(maxsize=32)
def _saturate(alg: Algebra, cap: int, workers: int) -> Clone:
    n = alg.size
    grid = np.indices((n, n, n), dtype=np.int64).reshape(3, -1)
    rows: List[np.ndarray] = []
    terms: List[Term] = []
    seen: Dict[bytes, int] = {}

    def admit(row: np.ndarray, term: Term) -> None:
        key = row.tobytes()
        if key in seen:
            return
        if len(rows) >= cap:
            raise CapExceeded("ternary clone", cap, len(rows) + 1)
        seen[key] = len(rows)
        rows.append(np.ascontiguousarray(row, dtype=np.int64))
        terms.append(term)

    for i in range(3):
        admit(grid[i], Var(i))
    for (name, arity), table in zip(alg.signature, alg.tables):
        if arity == 0:
            admit(np.full(n ** 3, table[()], dtype=np.int64), App(name))

    start = 0
    while start < len(rows):
        end = len(rows)
        elements = np.vstack(rows)
        for (name, arity), table in zip(alg.signature, alg.tables):
            if arity == 0:
                continue
            chunks = list(_tuples_with_new(end, start, arity))
            results = ordered_map(_apply_chunk, [(table, elements, idx) for idx in chunks], workers)
            for idx, values in zip(chunks, results):
                for k in range(len(idx)):
                    row = values[k]
                    if row.tobytes() in seen:
                        continue
                    admit(row, App(name, tuple(terms[int(j)] for j in idx[k])))
        logging.debug("clone round: %d -> %d operations", end, len(rows))
        start = end
    operations = tuple(TermOperation(n, 3, row, term) for row, term in zip(rows, terms))
    logging.info("ternary clone of %r saturated with %d operations", alg, len(operations))
    return Clone(n, operations)


def ternary_clone(alg: Algebra, cap: Optional[int] = None, workers: int = 1) -> Clone:
    """All ternary term operations of ``alg``, in generation order.

    Raises:
        CapExceeded: more than ``cap`` distinct operations would be generated.
    """
    return _saturate(alg, cap if cap is not None else Limits().clone_cap, workers)


# ---- Hagemann–Mitschke terms ------------------------------------------------- #


def _binary_keys(size: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    s, t = np.indices((size, size), dtype=np.int64).reshape(2, -1)
    stt = s * size * size + t * size + t
    sst = s * size * size + s * size + t
    return s, t, stt, sst


def _shortest_chain(clone: Clone) -> Optional[List[int]]:
    """Clone indices of a shortest θ-chain, or None when none exists."""
    size = clone.size
    s, t, stt, sst = _binary_keys(size)
    source, target = s.tobytes(), t.tobytes()
    edges: Dict[bytes, List[Tuple[int, bytes]]] = {}
    for index, op in enumerate(clone.operations):
        tail = op.table[stt].tobytes()
        head = op.table[sst].tobytes()
        edges.setdefault(tail, []).append((index, head))
    parent: Dict[bytes, Optional[Tuple[bytes, int]]] = {source: None}
    queue = deque([source])
    while queue and target not in parent:
        node = queue.popleft()
        for index, head in edges.get(node, ()):
            if head not in parent:
                parent[head] = (node, index)
                queue.append(head)
    if target not in parent:
        return None
    path: List[int] = []
    node = target
    while parent[node] is not None:
        node, index = parent[node]  # type: ignore[misc]
        path.append(index)
    path.reverse()
    return path


def _third_projection(clone: Clone) -> TermOperation:
    size = clone.size
    z = np.indices((size, size, size), dtype=np.int64).reshape(3, -1)[2]
    for op in clone.operations:
        if np.array_equal(op.table, z):
            return op
    raise InconsistencyError("third projection missing from the clone")


def find_hm_terms(alg: Algebra, n: int, cap: Optional[int] = None, workers: int = 1) -> HMSearch:
    """Search the ternary clone for θ1..θn-1 satisfying the n-permutability identities."""
    if n < 2:
        raise PermutabError(f"n must be at least 2, got {n}")
    try:
        clone = ternary_clone(alg, cap, workers)
    except CapExceeded as exc:
        logging.warning("HM search for n=%d inconclusive: %s", n, exc)
        return HMSearch(n, "inconclusive", clone_size=exc.reached, message=str(exc))
    path = _shortest_chain(clone)
    if path is None or len(path) > n - 1:
        return HMSearch(n, "none", clone_size=len(clone))
    chain = [clone.operations[i] for i in path]
    chain += [_third_projection(clone)] * (n - 1 - len(chain))
    verdict = check_identities(perm_algebra(alg.size, chain), perm_identities(n)[1])
    if not verdict.holds:
        raise InconsistencyError(f"θ-chain failed to re-verify: {verdict.to_dict()}")
    return HMSearch(n, "found", tuple(chain), len(clone))


def permutability_degree(alg: Algebra, max_n: int, cap: Optional[int] = None, workers: int = 1) -> DegreeResult:
    """Least n in 2..max_n admitting HM terms."""
    if max_n < 2:
        raise PermutabError(f"max_n must be at least 2, got {max_n}")
    for n in range(2, max_n + 1):
        search = find_hm_terms(alg, n, cap, workers)
        if search.outcome == "inconclusive":
            return DegreeResult(max_n, None, "inconclusive")
        if search.found:
            return DegreeResult(max_n, n, "found", search.chain)
    return DegreeResult(max_n, None, "none")


def cross_validate(
    alg: Algebra,
    max_n: int,
    cap: Optional[int] = None,
    limits: Optional[Limits] = None,
) -> Report:
    """Instance-check the implications between HM terms, Hagemann's conditions,
    congruence permutability, symmetric preorders and groupoid categories."""
    from .catfin import GroupoidFailure, groupoidify, preorder_to_category

    limits = limits or Limits()
    cap = cap if cap is not None else limits.clone_cap
    children: List[Report] = []

    preorders = enumerate_compatible(alg, "preorder", limits)
    asymmetric = [r for r in preorders if not properties(r).symmetric]
    for r in preorders:
        outcome = groupoidify(preorder_to_category(r))
        if isinstance(outcome, GroupoidFailure) != (r in asymmetric):
            children.append(Report.failed(
                "preorder-groupoid", {"relation": r.pairs},
                "groupoid iff symmetric violated", severity=Severity.CRITICAL))
            break
    else:
        children.append(Report.passed("preorder-groupoid", f"{len(preorders)} compatible preorders"))

    partial = False
    for n in range(2, max_n + 1):
        search = find_hm_terms(alg, n, cap, limits.workers)
        if search.outcome == "inconclusive":
            partial = True
            children.append(search.to_report(alg.labels))
            break
        hagemann = hagemann_check(alg, n, limits)
        permuting = congruence_permutability_check(alg, n, limits)
        if search.found:
            for check, verdict in (("hm=>hagemann", hagemann), ("hm=>congruence-permutability", permuting)):
                report = verdict.to_report(check)
                children.append(report.escalate())
            if asymmetric:
                children.append(Report.failed(
                    "hm=>symmetric-preorders", {"relation": asymmetric[0].pairs},
                    f"n={n}", severity=Severity.CRITICAL, labels=alg.labels))
            else:
                children.append(Report.passed("hm=>symmetric-preorders", f"n={n}"))
        if hagemann.holds:
            children.append(permuting.to_report("hagemann=>congruence-permutability").escalate())
            if asymmetric:
                children.append(Report.failed(
                    "hagemann=>symmetric-preorders", {"relation": asymmetric[0].pairs},
                    f"n={n}", severity=Severity.CRITICAL, labels=alg.labels))
    report = Report.combine("cross-validate", children, labels=alg.labels)
    if partial and report.status is Status.HOLDS:
        return Report(report.check, Status.INCONCLUSIVE, message="partial: clone cap exceeded",
                      children=report.children, labels=alg.labels)
    return report
