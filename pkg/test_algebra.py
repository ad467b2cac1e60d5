import itertools

import numpy as np
import pytest

from permutab.algebra import (
    Algebra,
    App,
    FiniteMap,
    Identity,
    IdentitySet,
    Signature,
    Var,
    check_identities,
    check_identity,
    eval_term,
    format_term,
    generated_subuniverse,
    is_homomorphism,
    parse_identity,
    parse_term,
    product_algebra,
    tabulate_term,
)
from permutab.errors import AlgebraError, SignatureError, SizeMismatch, TermError
from permutab.paperlab import (
    GROUP_SIGNATURE,
    IMPLICATION_SIGNATURE,
    SUBTRACTION_SIGNATURE,
    implication_identities,
    load_fixture,
)


def test_signature_rejects_duplicates():
    with pytest.raises(SignatureError):
        Signature.of(("f", 2), ("f", 1))


def test_signature_lookup():
    sig = Signature.of(("s", 2), ("0", 0))
    assert sig.names == ("s", "0")
    assert sig.constants == ("0",)
    assert sig.arity("s") == 2
    assert "s" in sig and "t" not in sig


def test_parse_and_format_term():
    term = parse_term("dot(dot(x,y),x)", IMPLICATION_SIGNATURE)
    assert term == App("dot", (App("dot", (Var(0), Var(1))), Var(0)))
    assert format_term(term) == "dot(dot(x,y),x)"


def test_parse_constant_and_variables():
    identity = parse_identity("s(x,0) = x", SUBTRACTION_SIGNATURE)
    assert identity.nvars == 1
    assert identity.lhs == App("s", (Var(0), App("0")))
    assert str(identity) == "s(x,0) = x"


def test_parse_errors_carry_position():
    with pytest.raises(TermError) as exc:
        parse_term("dot(x,dot(y))", IMPLICATION_SIGNATURE)
    assert exc.value.position == (1,)
    with pytest.raises(TermError):
        parse_term("f(x)", IMPLICATION_SIGNATURE)
    with pytest.raises(TermError):
        parse_term("dot(x,y", IMPLICATION_SIGNATURE)
    with pytest.raises(TermError):
        parse_identity("dot(x,y)", IMPLICATION_SIGNATURE)


def test_identity_set_validates_against_signature():
    bad = Identity(1, App("f", (Var(0),)), Var(0))
    with pytest.raises(TermError):
        IdentitySet(IMPLICATION_SIGNATURE, (bad,))


def test_algebra_rejects_bad_tables():
    with pytest.raises(AlgebraError):
        Algebra.build(2, IMPLICATION_SIGNATURE, {"dot": [[0, 2], [0, 0]]})
    with pytest.raises(AlgebraError):
        Algebra.build(2, IMPLICATION_SIGNATURE, {"dot": [0, 1, 0]})
    with pytest.raises(AlgebraError):
        Algebra.build(2, IMPLICATION_SIGNATURE, {})


def test_eval_term_on_fixtures(impl_z, subtr_a):
    dot = parse_term("dot(x,y)", IMPLICATION_SIGNATURE)
    # 2·3 = 3 in Z
    assert eval_term(impl_z, dot, [1, 2]) == 2
    assert impl_z.label(eval_term(impl_z, dot, [1, 2])) == "3"
    assert eval_term(subtr_a, parse_term("s(x,x)", SUBTRACTION_SIGNATURE), [1]) == 0
    with pytest.raises(AlgebraError):
        eval_term(impl_z, dot, [0, 3])
    with pytest.raises(TermError):
        eval_term(impl_z, dot, [0])


def test_tabulate_matches_table(impl_x):
    table = tabulate_term(impl_x, parse_term("dot(x,y)", IMPLICATION_SIGNATURE), 2)
    assert np.array_equal(table, impl_x.table("dot"))
    ground = tabulate_term(impl_x, parse_term("dot(x,x)", IMPLICATION_SIGNATURE), 1)
    assert ground.tolist() == [0, 0]


def test_check_identity_holds_on_implication_fixtures(impl_x, impl_y, impl_z):
    for alg in (impl_x, impl_y, impl_z):
        assert check_identities(alg, implication_identities()).holds


def test_check_identity_witness(impl_x):
    report = check_identity(impl_x, parse_identity("dot(x,y) = x", IMPLICATION_SIGNATURE))
    assert report.fails
    assert report.witness["env"] == [0, 1]
    assert report.witness["lhs_value"] == 1
    assert report.witness["rhs_value"] == 0
    assert "env = [1, 2]" in report.to_text()


def test_product_algebra(impl_x, impl_y):
    xy = product_algebra(impl_x, impl_y)
    assert xy.size == 4
    assert xy.labels == ("(1,1)", "(1,3)", "(2,1)", "(2,3)")
    assert check_identities(xy, implication_identities()).holds
    # (2,3)·(2,1) = (1,1)
    assert xy.op("dot", 3, 2) == 0


def test_product_needs_matching_signatures(impl_x, subtr_a):
    with pytest.raises(SignatureError):
        product_algebra(impl_x, subtr_a)


def test_generated_subuniverse(impl_z, subtr_a):
    assert generated_subuniverse(impl_z, {1, 2}) == frozenset({0, 1, 2})
    assert generated_subuniverse(impl_z, {0}) == frozenset({0})
    assert generated_subuniverse(subtr_a, {1}) == frozenset({0, 1})
    assert generated_subuniverse(subtr_a, []) == frozenset({0})


def test_finite_map_checks():
    with pytest.raises(SizeMismatch):
        FiniteMap(3, 2, (0, 1))
    with pytest.raises(AlgebraError):
        FiniteMap(2, 2, (0, 2))
    f = FiniteMap(3, 2, (0, 1, 0))
    s = FiniteMap(2, 3, (0, 1))
    assert f.after(s) == FiniteMap.identity(2)
    assert FiniteMap.constant(2, 3, 1).is_constant()


def test_is_homomorphism(impl_x, impl_z):
    assert is_homomorphism(FiniteMap(3, 2, (0, 1, 0)), impl_z, impl_x).holds
    report = is_homomorphism(FiniteMap.constant(2, 2, 1), impl_x, impl_x)
    assert report.fails
    assert report.witness["args"] == [0, 0]


def test_with_entry_leaves_original(impl_x):
    mutated = impl_x.with_entry("dot", (1, 1), 1)
    assert mutated.op("dot", 1, 1) == 1
    assert impl_x.op("dot", 1, 1) == 0
    assert mutated != impl_x


def test_to_frame_uses_labels(impl_z):
    frame = impl_z.to_frame("dot")
    assert list(frame.columns) == ["1", "2", "3"]
    assert frame.loc["3", "3"] == "1"


LAWS = {
    "impl": (IMPLICATION_SIGNATURE, [
        "dot(dot(x,y),x) = x",
        "dot(dot(x,y),y) = dot(dot(y,x),x)",
        "dot(x,dot(y,z)) = dot(y,dot(x,z))",
        "dot(x,y) = dot(y,x)",
        "dot(x,x) = y",
        "dot(x,dot(y,x)) = dot(x,x)",
    ]),
    "subtr": (SUBTRACTION_SIGNATURE, [
        "s(x,x) = 0",
        "s(x,0) = x",
        "s(0,x) = x",
        "s(s(x,y),z) = s(s(x,z),y)",
        "s(x,s(x,y)) = s(y,s(y,x))",
    ]),
    "group": (GROUP_SIGNATURE, [
        "add(x,y) = add(y,x)",
        "add(x,neg(x)) = zero",
        "add(x,y) = x",
        "neg(neg(x)) = x",
    ]),
}
LAW_ALGEBRAS = {
    "impl": ("impl-X", "impl-Y", "impl-Z"),
    "subtr": ("subtr-A", "z2-subtr", "trivial"),
    "group": ("z2-group", "klein-group"),
}


def _first_violation(alg, identity):
    for env in itertools.product(range(alg.size), repeat=identity.nvars):
        if eval_term(alg, identity.lhs, env) != eval_term(alg, identity.rhs, env):
            return list(env)
    return None


@pytest.mark.parametrize("family", sorted(LAWS))
def test_check_identity_agrees_with_nested_loops(family):
    signature, laws = LAWS[family]
    for name in LAW_ALGEBRAS[family]:
        alg = load_fixture(name).payload
        for law in laws:
            identity = parse_identity(law, signature)
            report = check_identity(alg, identity)
            expected = _first_violation(alg, identity)
            if expected is None:
                assert report.holds, (name, law)
            else:
                assert report.fails, (name, law)
                assert report.witness["env"] == expected


@pytest.mark.parametrize("left, right", [("impl-X", "impl-Y"), ("impl-Z", "impl-X"),
                                         ("subtr-A", "subtr-A"), ("z2-group", "z2-group")])
def test_product_projections_are_homomorphisms(left, right):
    a, b = load_fixture(left).payload, load_fixture(right).payload
    ab = product_algebra(a, b)
    first = FiniteMap(ab.size, a.size, tuple(i // b.size for i in range(ab.size)))
    second = FiniteMap(ab.size, b.size, tuple(i % b.size for i in range(ab.size)))
    assert is_homomorphism(first, ab, a).holds
    assert is_homomorphism(second, ab, b).holds


@pytest.mark.parametrize("name", ["impl-X", "impl-Z", "subtr-A", "z2-group", "klein-group"])
def test_generated_subuniverse_is_a_closure(name):
    alg = load_fixture(name).payload
    subsets = [frozenset(c) for k in range(alg.size + 1) for c in itertools.combinations(range(alg.size), k)]
    closures = {s: generated_subuniverse(alg, s) for s in subsets}
    for s, closed in closures.items():
        assert s <= closed
        assert generated_subuniverse(alg, closed) == closed
        for t in subsets:
            if s <= t:
                assert closed <= closures[t]
