"""Finite categories in sets: validation, thinness, groupoidification.

Composition convention: ``comp(β, γ)`` is defined when ``cod β = dom γ`` and
denotes ``γ∘β`` (first β, then γ). Every table, witness and document in this
package uses that order.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import InconsistencyError, InvalidCategory, PermutabError
from .parallel import ordered_map
from .relcalc import BinRelation, properties
from .report import Report

__all__ = [
    "FinCategory",
    "InversionMap",
    "GroupoidFailure",
    "validate_category",
    "is_thin",
    "preorder_to_category",
    "category_to_relation",
    "composability_relation",
    "s_properties",
    "has_left_cancellation",
    "groupoidify",
    "is_groupoid",
    "check_inversion",
    "monoid_category",
    "discrete_category",
    "enumerate_categories",
    "canonical_key",
    "composition_frame",
]

Triple = Tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class FinCategory:
    """Objects ``0..objects-1`` and morphisms ``0..morphisms-1``.

    Args:
        dom / cod: object of each morphism.
        ids: identity morphism of each object.
        comp: ``(β, γ, γ∘β)`` triples, one per composable pair.
        labels: optional morphism names used in reports.
        object_labels: optional object names.
    """

    objects: int
    morphisms: int
    dom: Tuple[int, ...]
    cod: Tuple[int, ...]
    ids: Tuple[int, ...]
    comp: Tuple[Triple, ...]
    labels: Optional[Tuple[str, ...]] = None
    object_labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "dom", tuple(int(v) for v in self.dom))
        object.__setattr__(self, "cod", tuple(int(v) for v in self.cod))
        object.__setattr__(self, "ids", tuple(int(v) for v in self.ids))
        object.__setattr__(self, "comp", tuple(sorted(tuple(int(v) for v in t) for t in self.comp)))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(v) for v in self.labels))
        if self.object_labels is not None:
            object.__setattr__(self, "object_labels", tuple(str(v) for v in self.object_labels))

    @property
    def table(self) -> Dict[Tuple[int, int], int]:
        return _table_of(self)

    def compose(self, beta: int, gamma: int) -> Optional[int]:
        """``γ∘β`` or None when the table has no entry."""
        return self.table.get((beta, gamma))

    def composable(self, beta: int, gamma: int) -> bool:
        return self.cod[beta] == self.dom[gamma]

    def hom(self, source: int, target: int) -> List[int]:
        return [m for m in range(self.morphisms) if self.dom[m] == source and self.cod[m] == target]

    def label(self, morphism: int) -> str:
        return self.labels[morphism] if self.labels is not None else str(morphism)

    def key(self) -> Tuple[object, ...]:
        return (self.objects, self.morphisms, self.dom, self.cod, self.ids, self.comp,
                self.labels, self.object_labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinCategory) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"FinCategory(objects={self.objects}, morphisms={self.morphisms})"


@lru_cache(maxsize=256)
def _table_of(c: FinCategory) -> Dict[Tuple[int, int], int]:
    return {(b, g): r for b, g, r in c.comp}


@dataclass(frozen=True)
class InversionMap:
    inv: Tuple[int, ...]

    def __call__(self, morphism: int) -> int:
        return self.inv[morphism]


@dataclass(frozen=True)
class GroupoidFailure:
    """``(β, α)`` lies in S but ``(α, β)`` does not."""

    beta: int
    alpha: int

    @property
    def witness(self) -> Tuple[int, int]:
        return (self.beta, self.alpha)


# ---- validation ------------------------------------------------------------ #


def _shape_violations(c: FinCategory) -> List[Dict[str, object]]:
    found: List[Dict[str, object]] = []
    if c.objects < 0 or c.morphisms < 0:
        found.append({"kind": "shape", "detail": "negative counts"})
        return found
    for name, values, length, bound in (
        ("dom", c.dom, c.morphisms, c.objects),
        ("cod", c.cod, c.morphisms, c.objects),
        ("id", c.ids, c.objects, c.morphisms),
    ):
        if len(values) != length:
            found.append({"kind": "shape", "detail": f"{name} has {len(values)} entries, expected {length}"})
        elif any(not 0 <= v < bound for v in values):
            found.append({"kind": "shape", "detail": f"{name} has entries outside 0..{bound - 1}"})
    for triple in c.comp:
        if len(triple) != 3 or any(not 0 <= v < c.morphisms for v in triple):
            found.append({"kind": "shape", "detail": f"composition entry {list(triple)} out of range"})
    for label_set, length, name in ((c.labels, c.morphisms, "labels"), (c.object_labels, c.objects, "object_labels")):
        if label_set is not None and len(label_set) != length:
            found.append({"kind": "shape", "detail": f"{name} has {len(label_set)} entries, expected {length}"})
    return found


def validate_category(c: FinCategory) -> Report:
    """Every violated axiom, in a fixed order: shape, identities, table, units, associativity."""
    return _validate(c)


@lru_cache(maxsize=1024)
def _validate(c: FinCategory) -> Report:
    violations = _shape_violations(c)
    if violations:
        return Report.failed("category", {"violations": violations}, "malformed category", labels=c.labels)

    for o, ident in enumerate(c.ids):
        if c.dom[ident] != o or c.cod[ident] != o:
            violations.append({"kind": "identity", "object": o, "morphism": ident})

    seen: Dict[Tuple[int, int], int] = {}
    for b, g, r in c.comp:
        if (b, g) in seen:
            violations.append({"kind": "duplicate-composite", "triple": [b, g, r]})
            continue
        seen[(b, g)] = r
        if not c.composable(b, g):
            violations.append({"kind": "extra-composite", "triple": [b, g, r]})
        elif c.dom[r] != c.dom[b] or c.cod[r] != c.cod[g]:
            violations.append({"kind": "composite-endpoints", "triple": [b, g, r]})
    for b, g in itertools.product(range(c.morphisms), repeat=2):
        if c.composable(b, g) and (b, g) not in seen:
            violations.append({"kind": "missing-composite", "pair": [b, g]})

    for a in range(c.morphisms):
        left = seen.get((c.ids[c.dom[a]], a))
        right = seen.get((a, c.ids[c.cod[a]]))
        if left is not None and left != a:
            violations.append({"kind": "unit-law", "morphism": a, "side": "left", "got": left})
        if right is not None and right != a:
            violations.append({"kind": "unit-law", "morphism": a, "side": "right", "got": right})

    for b, g, d in itertools.product(range(c.morphisms), repeat=3):
        if not (c.composable(b, g) and c.composable(g, d)):
            continue
        bg, gd = seen.get((b, g)), seen.get((g, d))
        if bg is None or gd is None:
            continue
        outer, inner = seen.get((bg, d)), seen.get((b, gd))
        if outer is not None and inner is not None and outer != inner:
            violations.append({"kind": "associativity", "triple": [b, g, d], "values": [outer, inner]})

    if violations:
        return Report.failed("category", {"violations": violations}, f"{len(violations)} violation(s)",
                             labels=c.labels)
    return Report.passed("category", f"{c.objects} objects, {c.morphisms} morphisms", labels=c.labels)


def _require_valid(c: FinCategory) -> None:
    report = validate_category(c)
    if not report.holds:
        raise InvalidCategory("operation needs a valid category", report)


# ---- preorders ---------------------------------------------------------------- #


def is_thin(c: FinCategory) -> bool:
    _require_valid(c)
    ends = [(c.dom[m], c.cod[m]) for m in range(c.morphisms)]
    return len(set(ends)) == len(ends)


def preorder_to_category(r: BinRelation, labels: Optional[Sequence[str]] = None) -> FinCategory:
    """One morphism per pair of ``r`` (pairs in lexicographic order)."""
    props = properties(r)
    if not props.preorder:
        raise PermutabError(
            f"preorder_to_category needs a reflexive transitive relation "
            f"(reflexive={props.reflexive}, transitive={props.transitive})"
        )
    pairs = r.pairs
    index = {pair: k for k, pair in enumerate(pairs)}
    comp = [
        (index[(x, y)], index[(y2, z)], index[(x, z)])
        for (x, y), (y2, z) in itertools.product(pairs, repeat=2)
        if y == y2
    ]
    names = list(labels) if labels is not None else [str(i) for i in range(r.size)]
    return FinCategory(
        objects=r.size,
        morphisms=len(pairs),
        dom=tuple(x for x, _ in pairs),
        cod=tuple(y for _, y in pairs),
        ids=tuple(index[(o, o)] for o in range(r.size)),
        comp=tuple(comp),
        labels=tuple(f"({names[x]},{names[y]})" for x, y in pairs),
        object_labels=tuple(labels) if labels is not None else None,
    )


def category_to_relation(c: FinCategory) -> BinRelation:
    if not is_thin(c):
        raise PermutabError("category_to_relation needs a thin category")
    return BinRelation.from_pairs(c.objects, ((c.dom[m], c.cod[m]) for m in range(c.morphisms)))


# ---- the relation S ------------------------------------------------------------ #


def composability_relation(c: FinCategory) -> BinRelation:
    """S = {(β, γ∘β)} on morphisms."""
    _require_valid(c)
    matrix = np.zeros((c.morphisms, c.morphisms), dtype=bool)
    for b, _, r in c.comp:
        matrix[b, r] = True
    return BinRelation(c.morphisms, matrix)


def _asymmetric_pair(s: BinRelation) -> Optional[Tuple[int, int]]:
    bad = np.argwhere(s.matrix & ~s.matrix.T)
    return (int(bad[0][0]), int(bad[0][1])) if len(bad) else None


def s_properties(c: FinCategory) -> Report:
    s = composability_relation(c)
    props = properties(s)
    if not (props.reflexive and props.transitive):
        raise InconsistencyError(f"S must be reflexive and transitive on a valid category, got {props}")
    pair = _asymmetric_pair(s)
    if pair is None:
        return Report.passed("s-relation", "S is reflexive, transitive and symmetric", labels=c.labels)
    return Report.failed("s-relation", {"pair": list(pair), "relation": s.pairs},
                         "S is reflexive and transitive but not symmetric", labels=c.labels)


def has_left_cancellation(c: FinCategory) -> Report:
    """γ∘β = γ∘δ implies β = δ; the witness is the first ``(γ, β, δ)`` with δ < β."""
    _require_valid(c)
    for gamma in range(c.morphisms):
        for beta in range(c.morphisms):
            if not c.composable(beta, gamma):
                continue
            for delta in range(beta):
                if c.composable(delta, gamma) and c.compose(beta, gamma) == c.compose(delta, gamma):
                    witness = {"gamma": gamma, "beta": beta, "delta": delta, "morphism": c.compose(beta, gamma)}
                    return Report.failed("left-cancellation", witness, labels=c.labels)
    return Report.passed("left-cancellation", labels=c.labels)


# ---- inverses ------------------------------------------------------------------ #


def groupoidify(c: FinCategory) -> Union[InversionMap, GroupoidFailure]:
    """Inverse of every morphism when S is symmetric, else the least obstruction.

    The obstruction is ``(id(dom α), α)`` for the least α without a left inverse;
    its mirror ``(α, id(dom α))`` is missing from S.
    """
    s = composability_relation(c)
    props = properties(s)
    if not (props.reflexive and props.transitive):
        raise InconsistencyError(f"S must be reflexive and transitive on a valid category, got {props}")
    if not props.symmetric:
        for alpha in range(c.morphisms):
            ident = c.ids[c.dom[alpha]]
            if (alpha, ident) not in s:
                logging.debug("groupoidify: %s has no left inverse", c.label(alpha))
                return GroupoidFailure(ident, alpha)
        raise InconsistencyError("S is not symmetric but every morphism has a left inverse")

    inverse: List[int] = []
    for alpha in range(c.morphisms):
        source, target = c.ids[c.dom[alpha]], c.ids[c.cod[alpha]]
        left = [g for g in range(c.morphisms) if c.composable(alpha, g) and c.compose(alpha, g) == source]
        right = [g for g in range(c.morphisms) if c.composable(g, alpha) and c.compose(g, alpha) == target]
        if not left or not right or left[0] != right[0]:
            raise InconsistencyError(
                f"selected inverses of morphism {alpha} differ: left={left[:1]} right={right[:1]}"
            )
        inverse.append(left[0])
    result = InversionMap(tuple(inverse))
    report = check_inversion(c, result)
    if not report.holds:
        raise InconsistencyError(f"inversion map failed to re-verify: {report.to_dict()}")
    return result


def check_inversion(c: FinCategory, inv: InversionMap) -> Report:
    _require_valid(c)
    if len(inv.inv) != c.morphisms:
        raise PermutabError(f"inversion map has {len(inv.inv)} entries for {c.morphisms} morphisms")
    for alpha, beta in enumerate(inv.inv):
        if not (c.composable(alpha, beta) and c.compose(alpha, beta) == c.ids[c.dom[alpha]]):
            return Report.failed("inversion", {"alpha": alpha, "beta": beta, "side": "left"}, labels=c.labels)
        if not (c.composable(beta, alpha) and c.compose(beta, alpha) == c.ids[c.cod[alpha]]):
            return Report.failed("inversion", {"alpha": alpha, "beta": beta, "side": "right"}, labels=c.labels)
    return Report.passed("inversion", labels=c.labels)


def is_groupoid(c: FinCategory) -> bool:
    return isinstance(groupoidify(c), InversionMap)


# ---- constructions --------------------------------------------------------------- #


def monoid_category(table: Sequence[Sequence[int]], labels: Optional[Sequence[str]] = None) -> FinCategory:
    """One-object category of a monoid given by its multiplication table ``table[x][y] = x·y``.

    comp(β, γ) = γ·β.
    """
    grid = np.array(table, dtype=np.int64)
    size = grid.shape[0]
    if grid.shape != (size, size) or size == 0:
        raise PermutabError("monoid table must be a non-empty square")
    units = [e for e in range(size) if (grid[e] == np.arange(size)).all() and (grid[:, e] == np.arange(size)).all()]
    if not units:
        raise PermutabError("table has no two-sided unit")
    comp = [(b, g, int(grid[g, b])) for b, g in itertools.product(range(size), repeat=2)]
    return FinCategory(1, size, (0,) * size, (0,) * size, (units[0],), tuple(comp),
                       tuple(labels) if labels is not None else None)


def discrete_category(n: int) -> FinCategory:
    return FinCategory(n, n, tuple(range(n)), tuple(range(n)), tuple(range(n)),
                       tuple((i, i, i) for i in range(n)))


# ---- enumeration ------------------------------------------------------------------- #


def canonical_key(c: FinCategory) -> Tuple[object, ...]:
    """Minimal relabelled form over object and non-identity permutations.

    Assumes identities are listed first (``ids == (0, .., objects-1)``), which every
    enumerated category satisfies; other categories are relabelled into that form.
    """
    _require_valid(c)
    identity_set = set(c.ids)
    others = [m for m in range(c.morphisms) if m not in identity_set]
    best: Optional[Tuple[object, ...]] = None
    for obj_perm in itertools.permutations(range(c.objects)):
        for order in itertools.permutations(others):
            rename = {c.ids[o]: obj_perm[o] for o in range(c.objects)}
            for k, m in enumerate(order):
                rename[m] = c.objects + k
            ends = tuple(sorted(
                (rename[m], obj_perm[c.dom[m]], obj_perm[c.cod[m]]) for m in range(c.morphisms)
            ))
            comp = tuple(sorted((rename[b], rename[g], rename[r]) for b, g, r in c.comp))
            key = (c.morphisms, c.objects, ends, comp)
            if best is None or key < best:
                best = key
    assert best is not None
    return best


def _from_key(key: Tuple[object, ...]) -> FinCategory:
    morphisms, objects, ends, comp = key  # type: ignore[misc]
    ordered = sorted(ends)  # type: ignore[arg-type]
    return FinCategory(
        objects=objects,  # type: ignore[arg-type]
        morphisms=morphisms,  # type: ignore[arg-type]
        dom=tuple(d for _, d, _ in ordered),
        cod=tuple(e for _, _, e in ordered),
        ids=tuple(range(objects)),  # type: ignore[arg-type]
        comp=comp,  # type: ignore[arg-type]
    )


def _associative_so_far(dom: Sequence[int], cod: Sequence[int], table: np.ndarray) -> bool:
    m = len(dom)
    for b, g, d in itertools.product(range(m), repeat=3):
        if cod[b] != dom[g] or cod[g] != dom[d]:
            continue
        bg, gd = table[b, g], table[g, d]
        if bg < 0 or gd < 0:
            continue
        outer, inner = table[bg, d], table[b, gd]
        if outer >= 0 and inner >= 0 and outer != inner:
            return False
    return True


def _categories_for_shape(shape: Tuple[int, Tuple[Tuple[int, int], ...]]) -> List[Tuple[object, ...]]:
    """Canonical keys of every category with the given objects and non-identity ends."""
    objects, ends = shape
    dom = list(range(objects)) + [d for d, _ in ends]
    cod = list(range(objects)) + [e for _, e in ends]
    m = len(dom)
    table = np.full((m, m), -1, dtype=np.int64)
    for a in range(m):
        table[dom[a], a] = a
        table[a, cod[a]] = a
    cells = [(b, g) for b, g in itertools.product(range(objects, m), repeat=2) if cod[b] == dom[g]]
    options = [[r for r in range(m) if dom[r] == dom[b] and cod[r] == cod[g]] for b, g in cells]
    keys: List[Tuple[object, ...]] = []

    def extend(k: int) -> None:
        if k == len(cells):
            comp = tuple((b, g, int(table[b, g])) for b, g in itertools.product(range(m), repeat=2)
                         if cod[b] == dom[g])
            c = FinCategory(objects, m, tuple(dom), tuple(cod), tuple(range(objects)), comp)
            keys.append(canonical_key(c))
            return
        b, g = cells[k]
        for r in options[k]:
            table[b, g] = r
            if _associative_so_far(dom, cod, table):
                extend(k + 1)
        table[b, g] = -1

    extend(0)
    return keys


def enumerate_categories(max_morphisms: int, workers: int = 1) -> List[FinCategory]:
    """Every category with 1..max_morphisms morphisms, one per isomorphism class."""
    if max_morphisms < 1:
        raise PermutabError(f"max_morphisms must be at least 1, got {max_morphisms}")
    shapes: List[Tuple[int, Tuple[Tuple[int, int], ...]]] = []
    for total in range(1, max_morphisms + 1):
        for objects in range(1, total + 1):
            hom_pairs = list(itertools.product(range(objects), repeat=2))
            for ends in itertools.combinations_with_replacement(hom_pairs, total - objects):
                shapes.append((objects, tuple(ends)))
    seen: Dict[Tuple[object, ...], None] = {}
    for keys in ordered_map(_categories_for_shape, shapes, workers):
        for key in keys:
            seen.setdefault(key, None)
    categories = [_from_key(key) for key in sorted(seen)]
    logging.info("enumerate_categories(%d): %d isomorphism classes from %d shapes",
                 max_morphisms, len(categories), len(shapes))
    return categories


def composition_frame(c: FinCategory) -> pd.DataFrame:
    """Rows β, columns γ, entries γ∘β ("" where not composable)."""
    names = [c.label(m) for m in range(c.morphisms)]
    rows = [
        [c.label(c.compose(b, g)) if c.compose(b, g) is not None else "" for g in range(c.morphisms)]
        for b in range(c.morphisms)
    ]
    frame = pd.DataFrame(rows, index=names, columns=names)
    frame.index.name = "β \\ γ"
    return frame
