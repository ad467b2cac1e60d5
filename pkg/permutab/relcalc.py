"""Binary relations on a finite carrier, with boolean-matrix semantics.

Composition is left-to-right: ``compose(r, s)`` is the relational product
written ``rs``, i.e. ``{(x, z) | x r y and y s z}``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .algebra import Algebra
from .config import Limits
from .errors import CapExceeded, PermutabError, SizeMismatch
from .report import Report

__all__ = [
    "BinRelation",
    "RelProperties",
    "CONSTRAINTS",
    "compose",
    "converse",
    "relation_power",
    "properties",
    "is_subrelation",
    "transitive_closure",
    "compatible_closure",
    "is_compatible",
    "is_congruence",
    "congruence_generated",
    "enumerate_compatible",
    "relation_frame",
]

CONSTRAINTS = ("any", "reflexive", "preorder", "equivalence")

Pair = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class BinRelation:
    """An endorelation on ``0..size-1``; equality is extensional."""

    size: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if self.size < 1:
            raise PermutabError(f"relation carrier must be non-empty, got size {self.size}")
        matrix = np.array(self.matrix, dtype=bool)
        if matrix.shape != (self.size, self.size):
            raise SizeMismatch(f"matrix of shape {matrix.shape} for a carrier of size {self.size}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    # ---- constructors --------------------------------------------------- #

    @classmethod
    def from_pairs(cls, size: int, pairs: Iterable[Sequence[int]]) -> "BinRelation":
        matrix = np.zeros((size, size), dtype=bool)
        for pair in pairs:
            x, y = int(pair[0]), int(pair[1])
            if not (0 <= x < size and 0 <= y < size):
                raise PermutabError(f"pair {(x, y)} outside carrier of size {size}")
            matrix[x, y] = True
        return cls(size, matrix)

    @classmethod
    def diagonal(cls, size: int) -> "BinRelation":
        return cls(size, np.eye(size, dtype=bool))

    @classmethod
    def full(cls, size: int) -> "BinRelation":
        return cls(size, np.ones((size, size), dtype=bool))

    @classmethod
    def empty(cls, size: int) -> "BinRelation":
        return cls(size, np.zeros((size, size), dtype=bool))

    @classmethod
    def from_mask(cls, size: int, mask: int) -> "BinRelation":
        bits = [(mask >> k) & 1 for k in range(size * size)]
        return cls(size, np.array(bits, dtype=bool).reshape(size, size))

    # ---- views ------------------------------------------------------------ #

    @property
    def pairs(self) -> List[Pair]:
        """Member pairs in lexicographic order."""
        return [(int(x), int(y)) for x, y in np.argwhere(self.matrix)]

    @property
    def count(self) -> int:
        return int(self.matrix.sum())

    @property
    def mask(self) -> int:
        """Bit ``x * size + y`` is set iff ``(x, y)`` is a member."""
        return sum(1 << (x * self.size + y) for x, y in self.pairs)

    def __contains__(self, pair: object) -> bool:
        x, y = pair  # type: ignore[misc]
        return bool(self.matrix[x, y])

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BinRelation) and self.size == other.size and bool(
            np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self) -> int:
        return hash((self.size, np.packbits(self.matrix).tobytes()))

    def __repr__(self) -> str:
        return f"BinRelation(size={self.size}, pairs={self.pairs})"

    def union(self, other: "BinRelation") -> "BinRelation":
        _same_size(self, other)
        return BinRelation(self.size, self.matrix | other.matrix)

    def intersection(self, other: "BinRelation") -> "BinRelation":
        _same_size(self, other)
        return BinRelation(self.size, self.matrix & other.matrix)

    def sort_key(self) -> Tuple[int, int]:
        return (self.count, self.mask)


@dataclass(frozen=True)
class RelProperties:
    reflexive: bool
    symmetric: bool
    transitive: bool

    @property
    def preorder(self) -> bool:
        return self.reflexive and self.transitive

    @property
    def equivalence(self) -> bool:
        return self.reflexive and self.symmetric and self.transitive


def _same_size(r: BinRelation, s: BinRelation) -> None:
    if r.size != s.size:
        raise SizeMismatch(f"relations on carriers of size {r.size} and {s.size}")


def _product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


# ---- calculus ---------------------------------------------------------- #


def compose(r: BinRelation, s: BinRelation) -> BinRelation:
    _same_size(r, s)
    return BinRelation(r.size, _product(r.matrix, s.matrix))


def converse(r: BinRelation) -> BinRelation:
    return BinRelation(r.size, r.matrix.T)


def relation_power(r: BinRelation, n: int) -> BinRelation:
    """``r`` composed with itself ``n`` times; ``n = 0`` is rejected."""
    if n < 1:
        raise PermutabError(f"relation powers are defined for n >= 1, got {n}")
    result = r.matrix
    for _ in range(n - 1):
        result = _product(result, r.matrix)
    return BinRelation(r.size, result)


def properties(r: BinRelation) -> RelProperties:
    m = r.matrix
    return RelProperties(
        reflexive=bool(np.diagonal(m).all()),
        symmetric=bool(np.array_equal(m, m.T)),
        transitive=bool(not (_product(m, m) & ~m).any()),
    )


def is_subrelation(r: BinRelation, s: BinRelation) -> bool:
    _same_size(r, s)
    return not bool((r.matrix & ~s.matrix).any())


def _transitive(m: np.ndarray) -> np.ndarray:
    while True:
        grown = m | _product(m, m)
        if np.array_equal(grown, m):
            return m
        m = grown


def transitive_closure(r: BinRelation) -> BinRelation:
    """Least transitive relation containing ``r``.

    Compatibility survives the closure only when ``r`` is reflexive: then the
    closure is a single power ``r^k``. A compatible non-reflexive relation can
    lose compatibility (see ``compatible_closure`` for the least compatible one).
    """
    return BinRelation(r.size, _transitive(r.matrix))


# ---- compatibility ------------------------------------------------------ #


def _operation_images(alg: Algebra, m: np.ndarray) -> np.ndarray:
    """Every pair obtained by applying an operation componentwise to pairs of ``m``."""
    out = np.zeros_like(m)
    pairs = np.argwhere(m)
    for (_, arity), table in zip(alg.signature, alg.tables):
        if arity == 0:
            out[table[()], table[()]] = True
            continue
        if len(pairs) == 0:
            continue
        grid = np.indices((len(pairs),) * arity).reshape(arity, -1)
        left = table[tuple(pairs[g, 0] for g in grid)]
        right = table[tuple(pairs[g, 1] for g in grid)]
        out[left, right] = True
    return out


def _check_size(r: BinRelation, alg: Algebra) -> None:
    if r.size != alg.size:
        raise SizeMismatch(f"relation on {r.size} elements vs algebra on {alg.size}")


def is_compatible(r: BinRelation, alg: Algebra) -> Report:
    """Is ``r`` a subuniverse of ``alg × alg``? The first violation is the witness."""
    _check_size(r, alg)
    m = r.matrix
    pairs = np.argwhere(m)
    for (name, arity), table in zip(alg.signature, alg.tables):
        if arity == 0:
            c = int(table[()])
            if not m[c, c]:
                witness = {"symbol": name, "pairs": [], "image": [c, c], "relation": r.pairs}
                return Report.failed("compatible", witness, f"constant {name} missing", labels=alg.labels)
            continue
        if len(pairs) == 0:
            continue
        grid = np.indices((len(pairs),) * arity).reshape(arity, -1)
        left = table[tuple(pairs[g, 0] for g in grid)]
        right = table[tuple(pairs[g, 1] for g in grid)]
        bad = np.flatnonzero(~m[left, right])
        if bad.size:
            k = int(bad[0])
            chosen = [[int(v) for v in pairs[g[k]]] for g in grid]
            witness = {
                "symbol": name,
                "pairs": chosen,
                "image": [int(left[k]), int(right[k])],
                "relation": r.pairs,
            }
            return Report.failed("compatible", witness, f"not closed under {name}", labels=alg.labels)
    return Report.passed("compatible", labels=alg.labels)


def _compatible(alg: Algebra, m: np.ndarray) -> np.ndarray:
    while True:
        grown = m | _operation_images(alg, m)
        if np.array_equal(grown, m):
            return m
        m = grown


def compatible_closure(alg: Algebra, r: BinRelation) -> BinRelation:
    """Least compatible relation containing ``r``."""
    _check_size(r, alg)
    return BinRelation(r.size, _compatible(alg, r.matrix))


def is_congruence(alg: Algebra, r: BinRelation) -> bool:
    return properties(r).equivalence and is_compatible(r, alg).holds


def _closure_for(alg: Algebra, constraint: str) -> Callable[[np.ndarray], np.ndarray]:
    eye = np.eye(alg.size, dtype=bool)

    def close(m: np.ndarray) -> np.ndarray:
        if constraint != "any":
            m = m | eye
        while True:
            grown = _compatible(alg, m)
            if constraint in ("preorder", "equivalence"):
                if constraint == "equivalence":
                    grown = grown | grown.T
                grown = _transitive(grown)
            if np.array_equal(grown, m):
                return m
            m = grown

    return close


def congruence_generated(alg: Algebra, r: BinRelation) -> BinRelation:
    """Least compatible equivalence relation containing ``r``."""
    _check_size(r, alg)
    return BinRelation(r.size, _closure_for(alg, "equivalence")(r.matrix))


def enumerate_compatible(
    alg: Algebra, constraint: str = "any", limits: Optional[Limits] = None
) -> List[BinRelation]:
    """All compatible relations satisfying ``constraint``, ordered by pair count then mask.

    The relations of each kind form a closure system, so the walk visits closed
    sets only: every member is the closure of its own pairs, reached by adding
    one pair at a time.
    """
    if constraint not in CONSTRAINTS:
        raise PermutabError(f"unknown constraint {constraint!r}; expected one of {CONSTRAINTS}")
    limits = limits or Limits()
    if alg.size > limits.max_relation_carrier:
        raise CapExceeded("relation enumeration carrier", limits.max_relation_carrier, alg.size)
    close = _closure_for(alg, constraint)
    start = close(np.zeros((alg.size, alg.size), dtype=bool))
    seen: Dict[bytes, np.ndarray] = {start.tobytes(): start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        for x, y in np.argwhere(~current):
            grown = current.copy()
            grown[x, y] = True
            closed = close(grown)
            key = closed.tobytes()
            if key not in seen:
                seen[key] = closed
                queue.append(closed)
    relations = sorted((BinRelation(alg.size, m) for m in seen.values()), key=BinRelation.sort_key)
    logging.debug("enumerate_compatible(%s): %d relations on %d elements", constraint, len(relations), alg.size)
    return relations


def relation_frame(r: BinRelation, labels: Optional[Sequence[str]] = None) -> pd.DataFrame:
    names = list(labels) if labels is not None else [str(i) for i in range(r.size)]
    return pd.DataFrame(r.matrix.astype(int), index=names, columns=names)
