import pytest

from permutab.catfin import (
    FinCategory,
    GroupoidFailure,
    InversionMap,
    canonical_key,
    category_to_relation,
    check_inversion,
    composability_relation,
    composition_frame,
    discrete_category,
    enumerate_categories,
    groupoidify,
    has_left_cancellation,
    is_groupoid,
    is_thin,
    monoid_category,
    preorder_to_category,
    s_properties,
    validate_category,
)
from permutab.errors import InvalidCategory, PermutabError
from permutab.paperlab import load_fixture
from permutab.relcalc import BinRelation, properties


def _kinds(report):
    return [v["kind"] for v in report.witness["violations"]]


def test_preorder_category(rel_r):
    c = preorder_to_category(rel_r, ["0", "a", "b"])
    assert c.morphisms == 4
    assert c.labels == ("(0,0)", "(a,a)", "(a,b)", "(b,b)")
    assert validate_category(c).holds
    assert is_thin(c)
    assert category_to_relation(c) == rel_r


def test_preorder_category_needs_preorder():
    with pytest.raises(PermutabError):
        preorder_to_category(BinRelation.from_pairs(2, [(0, 1)]))


def test_groupoidify_reports_non_symmetric_preorder(rel_r):
    c = preorder_to_category(rel_r, ["0", "a", "b"])
    outcome = groupoidify(c)
    assert outcome == GroupoidFailure(beta=1, alpha=2)
    assert c.label(outcome.alpha) == "(a,b)"
    assert not is_groupoid(c)
    report = s_properties(c)
    assert report.fails
    s = composability_relation(c)
    assert tuple(report.witness["pair"]) in s
    assert tuple(reversed(report.witness["pair"])) not in s


def test_symmetric_preorder_is_groupoid():
    r = BinRelation.from_pairs(3, [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)])
    c = preorder_to_category(r)
    inv = groupoidify(c)
    assert isinstance(inv, InversionMap)
    assert check_inversion(c, inv).holds
    assert has_left_cancellation(c).holds


def test_monoid_categories():
    idempotent = load_fixture("monoid-idempotent").payload
    assert composability_relation(idempotent).pairs == [(0, 0), (0, 1), (1, 1)]
    cancel = has_left_cancellation(idempotent)
    assert cancel.fails
    assert {k: cancel.witness[k] for k in ("gamma", "beta", "delta")} == {"gamma": 1, "beta": 1, "delta": 0}
    assert isinstance(groupoidify(idempotent), GroupoidFailure)

    z2 = load_fixture("monoid-z2").payload
    assert groupoidify(z2) == InversionMap((0, 1))
    assert s_properties(z2).holds


def test_monoid_category_needs_unit():
    with pytest.raises(PermutabError):
        monoid_category([[1, 1], [1, 1]])


def test_discrete_category():
    c = discrete_category(3)
    assert validate_category(c).holds
    assert groupoidify(c) == InversionMap((0, 1, 2))
    assert is_thin(c)


def test_validation_lists_violations():
    z2 = monoid_category([[0, 1], [1, 0]])
    missing = FinCategory(1, 2, (0, 0), (0, 0), (0,), tuple(t for t in z2.comp if t[:2] != (1, 1)))
    assert "missing-composite" in _kinds(validate_category(missing))

    wrong_unit = FinCategory(1, 2, (0, 0), (0, 0), (0,), ((0, 0, 0), (0, 1, 0), (1, 0, 1), (1, 1, 0)))
    assert "unit-law" in _kinds(validate_category(wrong_unit))

    shape = FinCategory(1, 2, (0,), (0, 0), (0,), ())
    assert _kinds(validate_category(shape)) == ["shape"]

    with pytest.raises(InvalidCategory) as exc:
        is_thin(shape)
    assert exc.value.report.fails


def test_non_associative_table_is_rejected():
    # a·a = b, a·b = a, b·a = b, b·b = a with unit 1 is not associative
    table = [[0, 1, 2], [1, 2, 1], [2, 2, 1]]
    c = monoid_category(table)
    assert "associativity" in _kinds(validate_category(c))


def test_enumerate_small_categories():
    assert len(enumerate_categories(1)) == 1
    assert len(enumerate_categories(2)) == 4
    with pytest.raises(PermutabError):
        enumerate_categories(0)


def test_enumeration_is_worker_independent():
    one = enumerate_categories(3, workers=1)
    two = enumerate_categories(3, workers=2)
    assert one == two
    assert len({canonical_key(c) for c in one}) == len(one)


def test_groupoid_construction_over_all_small_categories():
    categories = enumerate_categories(4)
    assert categories
    for c in categories:
        assert validate_category(c).holds
        s = composability_relation(c)
        props = properties(s)
        assert props.reflexive and props.transitive
        outcome = groupoidify(c)
        assert isinstance(outcome, InversionMap) == props.symmetric
        if isinstance(outcome, InversionMap):
            assert check_inversion(c, outcome).holds
            assert has_left_cancellation(c).holds
        else:
            assert (outcome.beta, outcome.alpha) in s
            assert (outcome.alpha, outcome.beta) not in s
        if is_thin(c):
            assert is_groupoid(c) == properties(category_to_relation(c)).symmetric


def test_composition_frame_labels(rel_r):
    frame = composition_frame(preorder_to_category(rel_r, ["0", "a", "b"]))
    assert frame.loc["(a,a)", "(a,b)"] == "(a,b)"
    assert frame.loc["(a,b)", "(a,a)"] == ""


def test_inverse_map_is_an_involution():
    groupoids = 0
    for c in enumerate_categories(4):
        outcome = groupoidify(c)
        if isinstance(outcome, GroupoidFailure):
            continue
        groupoids += 1
        for alpha in range(c.morphisms):
            assert outcome(outcome(alpha)) == alpha
    assert groupoids > 0


def test_thin_categories_round_trip_through_preorders():
    thin = [c for c in enumerate_categories(4) if is_thin(c)]
    assert thin
    for c in thin:
        rebuilt = preorder_to_category(category_to_relation(c))
        assert canonical_key(rebuilt) == canonical_key(c)


def test_preorder_category_is_groupoid_iff_symmetric():
    for size in (1, 2, 3):
        for mask in range(1 << (size * size)):
            r = BinRelation.from_mask(size, mask)
            if not properties(r).preorder:
                continue
            c = preorder_to_category(r)
            assert is_thin(c)
            assert is_groupoid(c) == properties(r).symmetric
