"""Fixtures for the worked examples and the checks that re-verify them.

라벨은 예제 표기 그대로 둔다: 함의대수는 "1,2,3", 뺄셈대수는 "0,a,b".
원소 인덱스는 표에 나온 순서(0,1,2)를 따른다.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from .algebra import (
    Algebra,
    FiniteMap,
    IdentitySet,
    Signature,
    check_identities,
    generated_subuniverse,
    is_homomorphism,
    parse_term,
    product_algebra,
    tabulate_term,
)
from .catfin import monoid_category, validate_category
from .config import Limits
from .errors import FixtureError, SignatureError
from .maltsev import (
    TermOperation,
    congruence_permutability_check,
    find_hm_terms,
    hagemann_check,
    perm_algebra,
    perm_identities,
    permutability_degree,
)
from .relcalc import BinRelation, congruence_generated, is_compatible, is_subrelation, properties
from .report import Report

__all__ = [
    "Fixture",
    "NamedMap",
    "MapBundle",
    "MonoidStructure",
    "IMPLICATION_SIGNATURE",
    "SUBTRACTION_SIGNATURE",
    "GROUP_SIGNATURE",
    "implication_identities",
    "subtraction_identities",
    "load_fixture",
    "list_fixtures",
    "pointed_element",
    "z2_maltsev_operation",
    "verify_fixture_identities",
    "verify_punctual_span",
    "verify_subtraction_example",
    "verify_subtractive_monoid",
    "verify_perm_algebra",
    "verify_internal_monoids",
    "verify_perm_examples",
    "verify_paper",
]

IMPLICATION_SIGNATURE = Signature.of(("dot", 2))
SUBTRACTION_SIGNATURE = Signature.of(("s", 2), ("0", 0))
GROUP_SIGNATURE = Signature.of(("add", 2), ("neg", 1), ("zero", 0))

IMPLICATION_LAWS = (
    "dot(dot(x,y),x) = x",
    "dot(dot(x,y),y) = dot(dot(y,x),x)",
    "dot(x,dot(y,z)) = dot(y,dot(x,z))",
)
SUBTRACTION_LAWS = ("s(x,x) = 0", "s(x,0) = x")

PERM_FIXTURE = re.compile(r"identities-perm\((\d+)\)")
HAGEMANN_RANGE = range(2, 7)


# ---- fixture types -------------------------------------------------------- #


@dataclass(frozen=True)
class NamedMap:
    name: str
    source: str
    target: str
    mapping: FiniteMap


@dataclass(frozen=True)
class MapBundle:
    maps: Tuple[NamedMap, ...]

    def __getitem__(self, name: str) -> NamedMap:
        for item in self.maps:
            if item.name == name:
                return item
        raise KeyError(name)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(item.name for item in self.maps)


@dataclass(frozen=True)
class Fixture:
    """A named object from the worked examples.

    ``kind`` is one of ``algebra``, ``relation``, ``category``, ``maps``, ``identities``.
    """

    name: str
    kind: str
    payload: Any
    labels: Optional[Tuple[str, ...]] = None
    description: str = ""


@dataclass(frozen=True, eq=False)
class MonoidStructure:
    size: int
    plus: np.ndarray
    unit: int

    def __post_init__(self) -> None:
        plus = np.array(self.plus, dtype=np.int64).reshape(self.size, self.size)
        plus.setflags(write=False)
        object.__setattr__(self, "plus", plus)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, MonoidStructure)
            and (self.size, self.unit) == (other.size, other.unit)
            and bool(np.array_equal(self.plus, other.plus))
        )

    def __hash__(self) -> int:
        return hash((self.size, self.unit, self.plus.tobytes()))

    def add(self, x: int, y: int) -> int:
        return int(self.plus[x, y])

    def check_laws(self) -> Report:
        """Associativity and the two-sided unit law, exhaustively."""
        p = self.plus
        x, y, z = np.indices((self.size,) * 3)
        bad = np.argwhere(p[p[x, y], z] != p[x, p[y, z]])
        if len(bad):
            args = [int(v) for v in bad[0]]
            return Report.failed("monoid-laws", {"law": "associativity", "args": args})
        for e in range(self.size):
            if p[self.unit, e] != e or p[e, self.unit] != e:
                return Report.failed("monoid-laws", {"law": "unit", "args": [e]})
        return Report.passed("monoid-laws")


# ---- catalog ---------------------------------------------------------------- #


def implication_identities() -> IdentitySet:
    return IdentitySet.parse(IMPLICATION_SIGNATURE, IMPLICATION_LAWS)


def subtraction_identities() -> IdentitySet:
    return IdentitySet.parse(SUBTRACTION_SIGNATURE, SUBTRACTION_LAWS)


def _z2_group() -> Algebra:
    return Algebra.build(2, GROUP_SIGNATURE, {"add": [[0, 1], [1, 0]], "neg": [0, 1], "zero": 0}, ("0", "1"))


def _algebras() -> Dict[str, Tuple[Callable[[], Algebra], str]]:
    return {
        "impl-X": (
            lambda: Algebra.build(2, IMPLICATION_SIGNATURE, {"dot": [[0, 1], [0, 0]]}, ("1", "2")),
            "two-element implication algebra X",
        ),
        "impl-Y": (
            lambda: Algebra.build(2, IMPLICATION_SIGNATURE, {"dot": [[0, 1], [0, 0]]}, ("1", "3")),
            "two-element implication algebra Y",
        ),
        "impl-Z": (
            lambda: Algebra.build(
                3, IMPLICATION_SIGNATURE, {"dot": [[0, 1, 2], [0, 0, 2], [0, 1, 0]]}, ("1", "2", "3")
            ),
            "three-element implication algebra Z, apex of the punctual span",
        ),
        "subtr-A": (
            lambda: Algebra.build(
                3, SUBTRACTION_SIGNATURE, {"s": [[0, 0, 0], [1, 0, 0], [2, 0, 0]], "0": 0}, ("0", "a", "b")
            ),
            "three-element subtraction algebra A carrying a non-symmetric preorder",
        ),
        "z2-group": (_z2_group, "two-element group in the signature add/neg/zero"),
        "z2-subtr": (
            lambda: Algebra.build(2, SUBTRACTION_SIGNATURE, {"s": [[0, 1], [1, 0]], "0": 0}, ("0", "1")),
            "two-element group as a subtraction algebra, s(x,y) = x - y",
        ),
        "klein-group": (lambda: product_algebra(_z2_group(), _z2_group()), "Klein four-group"),
        "trivial": (
            lambda: Algebra.build(1, SUBTRACTION_SIGNATURE, {"s": [[0]], "0": 0}, ("0",)),
            "one-element subtraction algebra",
        ),
    }


# Identity sets each algebra fixture must satisfy on load.
ALGEBRA_CLAIMS: Dict[str, Callable[[], IdentitySet]] = {
    "impl-X": implication_identities,
    "impl-Y": implication_identities,
    "impl-Z": implication_identities,
    "subtr-A": subtraction_identities,
    "z2-subtr": subtraction_identities,
    "trivial": subtraction_identities,
}


def _span_bundle() -> MapBundle:
    return MapBundle((
        NamedMap("f", "impl-Z", "impl-X", FiniteMap(3, 2, (0, 1, 0))),
        NamedMap("g", "impl-Z", "impl-Y", FiniteMap(3, 2, (0, 0, 1))),
        NamedMap("s", "impl-X", "impl-Z", FiniteMap(2, 3, (0, 1))),
        NamedMap("t", "impl-Y", "impl-Z", FiniteMap(2, 3, (0, 2))),
    ))


def _other_fixtures() -> Dict[str, Tuple[Callable[[], Fixture], str]]:
    return {
        "span-fgst": (
            lambda: Fixture("span-fgst", "maps", _span_bundle(), description="span X <- Z -> Y with sections s, t"),
            "span maps f, g and their sections s, t",
        ),
        "rel-R": (
            lambda: Fixture(
                "rel-R", "relation", BinRelation.from_pairs(3, [(0, 0), (1, 1), (2, 2), (1, 2)]),
                labels=("0", "a", "b"), description="R = {(0,0),(a,a),(b,b),(a,b)} on A",
            ),
            "reflexive transitive non-symmetric relation on A",
        ),
        "identities-implication": (
            lambda: Fixture("identities-implication", "identities", implication_identities()),
            "(xy)x = x, (xy)y = (yx)x, x(yz) = y(xz)",
        ),
        "identities-subtraction": (
            lambda: Fixture("identities-subtraction", "identities", subtraction_identities()),
            "s(x,x) = 0, s(x,0) = x",
        ),
        "monoid-idempotent": (
            lambda: Fixture("monoid-idempotent", "category", monoid_category([[0, 1], [1, 1]], ("1", "a"))),
            "one-object category of {1, a} with a·a = a",
        ),
        "monoid-z2": (
            lambda: Fixture("monoid-z2", "category", monoid_category([[0, 1], [1, 0]], ("1", "a"))),
            "one-object category of the two-element group",
        ),
    }


def list_fixtures() -> List[Tuple[str, str]]:
    """``(name, description)`` for every fixture; the parametrised schema is listed as ``identities-perm(n)``."""
    rows = [(name, desc) for name, (_, desc) in _algebras().items()]
    rows += [(name, desc) for name, (_, desc) in _other_fixtures().items()]
    rows.append(("identities-perm(n)", "n-permutability identities over theta1..theta{n-1}"))
    return sorted(rows)


def load_fixture(name: str) -> Fixture:
    """Build the named fixture and re-check the claims it carries.

    Raises:
        FixtureError: unknown name, or a fixture fails its own validity check.
    """
    algebras = _algebras()
    if name in algebras:
        build, desc = algebras[name]
        alg = build()
        claims = ALGEBRA_CLAIMS.get(name)
        if claims is not None:
            report = check_identities(alg, claims())
            if not report.holds:
                raise FixtureError(f"fixture {name} violates its identities: {report.to_dict()}")
        return Fixture(name, "algebra", alg, alg.labels, desc)
    others = _other_fixtures()
    if name in others:
        fixture = others[name][0]()
        if fixture.kind == "category" and not validate_category(fixture.payload).holds:
            raise FixtureError(f"fixture {name} is not a valid category")
        return fixture
    match = PERM_FIXTURE.fullmatch(name)
    if match:
        n = int(match.group(1))
        if n < 2:
            raise FixtureError(f"identities-perm needs n >= 2, got {n}")
        signature, ids = perm_identities(n)
        return Fixture(name, "identities", IdentitySet(signature, ids), description=f"{n}-permutability schema")
    raise FixtureError(f"unknown fixture {name!r}; known: {[n for n, _ in list_fixtures()]}")


def _algebra(name: str) -> Algebra:
    return load_fixture(name).payload


def pointed_element(alg: Algebra, symbol: str = "dot") -> Optional[int]:
    """The derived constant ``x·x``, or None when ``x·x`` depends on x."""
    diagonal = {int(alg.table(symbol)[x, x]) for x in range(alg.size)}
    return diagonal.pop() if len(diagonal) == 1 else None


def z2_maltsev_operation() -> TermOperation:
    """x − y + z on the two-element group, tabulated from its term."""
    group = _z2_group()
    term = parse_term("add(add(x,neg(y)),z)", GROUP_SIGNATURE)
    return TermOperation(2, 3, tabulate_term(group, term, 3), term)


# ---- checks ------------------------------------------------------------------- #


def verify_fixture_identities() -> Report:
    children = [
        check_identities(_algebra(name), ALGEBRA_CLAIMS[name](), check=f"identities:{name}")
        for name in ("impl-X", "impl-Y", "impl-Z", "subtr-A")
    ]
    perm = perm_algebra(2, [z2_maltsev_operation()], ("0", "1"))
    children.append(check_identities(perm, perm_identities(2)[1], check="identities:perm(2) on z2"))
    return Report.combine("fixture-identities", children)


def _section_check(check: str, outer: FiniteMap, inner: FiniteMap, labels: Optional[Tuple[str, ...]]) -> Report:
    composite = outer.after(inner)
    for x, v in enumerate(composite.image):
        if v != x:
            return Report.failed(check, {"args": [x], "lhs_value": v, "rhs_value": x}, labels=labels)
    return Report.passed(check, labels=labels)


def _constant_check(check: str, composite: FiniteMap, point: Optional[int], labels: Optional[Tuple[str, ...]]) -> Report:
    if point is None:
        return Report.failed(check, {"image": list(composite.image_set())}, "codomain has no pointed element",
                             labels=labels)
    for x, v in enumerate(composite.image):
        if v != point:
            return Report.failed(check, {"args": [x], "lhs_value": v, "rhs_value": point}, labels=labels)
    return Report.passed(check, labels=labels)


def verify_punctual_span(
    x: Optional[Algebra] = None,
    y: Optional[Algebra] = None,
    z: Optional[Algebra] = None,
    maps: Optional[MapBundle] = None,
) -> Report:
    """X ← Z → Y with sections s, t: homomorphisms, punctuality, and ⟨f,g⟩ not surjective."""
    x = x if x is not None else _algebra("impl-X")
    y = y if y is not None else _algebra("impl-Y")
    z = z if z is not None else _algebra("impl-Z")
    maps = maps if maps is not None else load_fixture("span-fgst").payload
    objects = {"impl-X": x, "impl-Y": y, "impl-Z": z}
    f, g, s, t = (maps[name].mapping for name in ("f", "g", "s", "t"))

    children: List[Report] = [
        check_identities(alg, implication_identities(), check=f"identities:{name}")
        for name, alg in objects.items()
    ]
    for item in maps.maps:
        hom = is_homomorphism(item.mapping, objects[item.source], objects[item.target])
        children.append(Report(f"homomorphism:{item.name}", hom.status, hom.witness, hom.message,
                               labels=objects[item.source].labels))
    children.append(_section_check("f.s = id", f, s, x.labels))
    children.append(_section_check("g.t = id", g, t, y.labels))
    children.append(_constant_check("g.s constant", g.after(s), pointed_element(y), y.labels))
    children.append(_constant_check("f.t constant", f.after(t), pointed_element(x), x.labels))

    xy = product_algebra(x, y)
    pairing = FiniteMap(z.size, xy.size, tuple(f(e) * y.size + g(e) for e in range(z.size)))
    image = list(pairing.image_set())
    pair_hom = is_homomorphism(pairing, z, xy)
    if not pair_hom.holds:
        children.append(Report("pairing-homomorphism", pair_hom.status, pair_hom.witness, labels=z.labels))
    if len(image) < xy.size:
        children.append(Report.passed("pairing-not-surjective",
                                      f"image has {len(image)} of {xy.size} elements: {image}", labels=xy.labels))
    else:
        children.append(Report.failed("pairing-not-surjective", {"image": image},
                                      "pairing is surjective", labels=xy.labels))
    if len(image) != 3 or xy.size != 4:
        children.append(Report.failed("pairing-image-size", {"image": image, "product_size": xy.size},
                                      "expected 3 of 4 elements", labels=xy.labels))
    return Report.combine("punctual-span", children)


def verify_subtraction_example(a: Optional[Algebra] = None, r: Optional[BinRelation] = None) -> Report:
    """A satisfies the subtraction laws and carries a compatible preorder that is not symmetric."""
    a = a if a is not None else _algebra("subtr-A")
    r = r if r is not None else load_fixture("rel-R").payload
    children: List[Report] = [check_identities(a, subtraction_identities(), check="subtraction-identities")]
    children.append(is_compatible(r, a))
    props = properties(r)
    shape = {"relation": r.pairs, "reflexive": props.reflexive, "symmetric": props.symmetric,
             "transitive": props.transitive}
    if props.reflexive and props.transitive and not props.symmetric:
        children.append(Report.passed("preorder-not-symmetric", labels=a.labels))
    else:
        children.append(Report.failed("preorder-not-symmetric", shape, labels=a.labels))
    generated = congruence_generated(a, r)
    added = [pair for pair in generated.pairs if pair not in r]
    if is_subrelation(r, generated) and added:
        children.append(Report.passed("congruence-generated",
                                      f"{generated.count} pairs, adds {added}", labels=a.labels))
    else:
        children.append(Report.failed("congruence-generated", {"relation": generated.pairs},
                                      "does not strictly contain R", labels=a.labels))
    return Report.combine("subtraction-example", children, labels=a.labels)


def _pointwise(check: str, lhs: np.ndarray, rhs: np.ndarray) -> Report:
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        args = [int(v) for v in bad[0]]
        return Report.failed(check, {"args": args, "lhs_value": int(lhs[tuple(args)]),
                                     "rhs_value": int(rhs[tuple(args)])})
    return Report.passed(check)


def verify_subtractive_monoid(alg: Algebra, m: MonoidStructure) -> Report:
    """An internal monoid on a subtraction algebra is an abelian group with x+y = s(x,s(0,y)).

    Preconditions (subtraction laws, monoid laws, unit subalgebra, addition a
    homomorphism) are reported apart from the conclusions; a failed conclusion
    on valid preconditions is critical.
    """
    if "s" not in alg.signature or "0" not in alg.signature:
        raise SignatureError("verify_subtractive_monoid needs symbols s/2 and 0/0")
    if m.size != alg.size:
        raise SignatureError(f"monoid on {m.size} elements for an algebra on {alg.size}")
    s, zero = alg.table("s"), int(alg.table("0")[()])
    plus = m.plus

    pre: List[Report] = [check_identities(alg, subtraction_identities(), check="subtraction-identities"),
                         m.check_laws()]
    if generated_subuniverse(alg, [m.unit]) == frozenset({m.unit}):
        pre.append(Report.passed("unit-subalgebra"))
    else:
        pre.append(Report.failed("unit-subalgebra", {"seed": [m.unit],
                                                     "subuniverse": sorted(generated_subuniverse(alg, [m.unit]))}))
    square = product_algebra(alg, alg)
    hom = is_homomorphism(FiniteMap(square.size, alg.size, tuple(int(v) for v in plus.reshape(-1))), square, alg)
    pre.append(Report("plus-homomorphism", hom.status, hom.witness, hom.message))
    preconditions = Report.combine("preconditions", pre, labels=alg.labels)

    if not preconditions.holds:
        conclusions = Report.inconclusive("conclusions", "preconditions failed")
    else:
        x, y = np.indices((alg.size, alg.size))
        xs = np.arange(alg.size)
        negation = s[zero, xs]
        concl = [
            _pointwise("right-inverse", plus[xs, negation], np.full(alg.size, zero)),
            _pointwise("left-inverse", plus[negation, xs], np.full(alg.size, zero)),
            _pointwise("commutative", plus[x, y], plus[y, x]),
            _pointwise("addition-formula", plus[x, y], s[x, s[zero, y]]),
        ]
        conclusions = Report.combine("conclusions", (c.escalate() for c in concl), labels=alg.labels)
    return Report.combine("subtractive-monoid", [preconditions, conclusions], labels=alg.labels)


def verify_perm_algebra(alg: Algebra, n: int, limits: Optional[Limits] = None) -> Report:
    """θ-identities first; on success both relational checks must hold (critical otherwise)."""
    expected, ids = perm_identities(n)
    for name, arity in expected:
        if name not in alg.signature or alg.signature.arity(name) != arity:
            raise SignatureError(f"perm algebra for n={n} needs ternary symbols {list(expected.names)}")
    identities = check_identities(alg, ids, check="perm-identities")
    children = [identities]
    if identities.holds:
        children.append(congruence_permutability_check(alg, n, limits).to_report("congruence-permutability").escalate())
        children.append(hagemann_check(alg, n, limits).to_report("hagemann").escalate())
    return Report.combine("perm-algebra", children, message=f"n={n}", labels=alg.labels)


def verify_internal_monoids(max_size: int = 3, limits: Optional[Limits] = None) -> Report:
    """Every internal monoid on every subtraction algebra up to ``max_size`` elements."""
    from .search import SearchSpec, enumerate_models, internal_monoids

    limits = limits or Limits()
    spec = SearchSpec(SUBTRACTION_SIGNATURE, subtraction_identities().identities, (1, max_size), limits=limits)
    enumeration = enumerate_models(spec)
    failures: List[Report] = []
    checked = 0
    for alg in enumeration.models:
        for monoid in internal_monoids(alg):
            checked += 1
            report = verify_subtractive_monoid(alg, monoid)
            if not report.holds:
                failures.append(report)
    message = f"{checked} internal monoids on {len(enumeration.models)} algebras"
    logging.info("internal monoids: %s", message)
    report = Report.combine("internal-monoids", failures, message=message)
    if report.holds and not enumeration.complete:
        return Report.inconclusive("internal-monoids", f"{message}; enumeration partial: {enumeration.reason}")
    return report


def _hagemann_on_a(a: Algebra, r: BinRelation, limits: Limits) -> Report:
    for n in HAGEMANN_RANGE:
        verdict = hagemann_check(a, n, limits)
        if verdict.holds or verdict.witness["relation"] != r.pairs:  # type: ignore[index]
            return Report.failed("hagemann-fails-on-A", {"n": n, "verdict": verdict.status.value,
                                                         "witness": verdict.witness}, labels=a.labels)
    return Report.passed("hagemann-fails-on-A", f"witness R for n in {HAGEMANN_RANGE.start}..{HAGEMANN_RANGE.stop - 1}",
                         labels=a.labels)


def _degrees(limits: Limits) -> Report:
    expected = (("z2-group", 4, 2), ("impl-X", 4, 3), ("subtr-A", 6, None))
    children: List[Report] = []
    for name, max_n, degree in expected:
        result = permutability_degree(_algebra(name), max_n, limits.clone_cap, limits.workers)
        if result.outcome == "inconclusive":
            children.append(Report.inconclusive(f"degree:{name}", "clone cap exceeded"))
        elif result.degree == degree:
            children.append(Report.passed(f"degree:{name}", f"{degree if degree else 'none'} up to {max_n}"))
        else:
            children.append(Report.failed(f"degree:{name}", {"expected": degree, "found": result.degree}))
    return Report.combine("degrees", children)


def verify_perm_examples(limits: Optional[Limits] = None) -> Report:
    """The group Mal'tsev term at n=2 and the chain found on X at n=3, reinstalled as θ-operations."""
    limits = limits or Limits()
    children = [verify_perm_algebra(perm_algebra(2, [z2_maltsev_operation()], ("0", "1")), 2, limits)]
    search = find_hm_terms(_algebra("impl-X"), 3, limits.clone_cap, limits.workers)
    if search.found:
        children.append(verify_perm_algebra(perm_algebra(2, search.chain, ("1", "2")), 3, limits))
    else:
        children.append(search.to_report())
    return Report.combine("perm-examples", children)


def verify_paper(limits: Optional[Limits] = None) -> Report:
    """Full regression over every fixture claim."""
    limits = limits or Limits()
    a = _algebra("subtr-A")
    r = load_fixture("rel-R").payload
    children = [
        verify_fixture_identities(),
        verify_punctual_span(),
        verify_subtraction_example(a, r),
        _hagemann_on_a(a, r, limits),
        _degrees(limits),
        verify_internal_monoids(3, limits),
        verify_perm_examples(limits),
    ]
    return Report.combine("worked-examples", children)
