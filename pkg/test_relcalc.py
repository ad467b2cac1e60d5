import functools
import itertools

import pytest

from permutab.config import Limits
from permutab.errors import CapExceeded, PermutabError, SizeMismatch
from permutab.paperlab import load_fixture
from permutab.relcalc import (
    BinRelation,
    compatible_closure,
    compose,
    congruence_generated,
    converse,
    enumerate_compatible,
    is_compatible,
    is_congruence,
    is_subrelation,
    properties,
    relation_frame,
    relation_power,
    transitive_closure,
)

DIAG3 = [(0, 0), (1, 1), (2, 2)]


def test_pairs_are_sorted_and_masked():
    r = BinRelation.from_pairs(2, [(1, 0), (0, 0)])
    assert r.pairs == [(0, 0), (1, 0)]
    assert r.mask == 0b0101
    assert BinRelation.from_mask(2, r.mask) == r
    with pytest.raises(PermutabError):
        BinRelation.from_pairs(2, [(0, 2)])


def test_converse_of_fixture_relation(rel_r):
    assert converse(rel_r).pairs == DIAG3 + [(2, 1)]
    assert not is_subrelation(rel_r, converse(rel_r))
    assert is_subrelation(BinRelation.diagonal(3), rel_r)


def test_compose_is_left_to_right():
    r = BinRelation.from_pairs(3, [(0, 1)])
    s = BinRelation.from_pairs(3, [(1, 2)])
    assert compose(r, s).pairs == [(0, 2)]
    assert compose(s, r).pairs == []
    with pytest.raises(SizeMismatch):
        compose(r, BinRelation.diagonal(2))


def test_powers(rel_r):
    assert relation_power(rel_r, 1) == rel_r
    assert relation_power(rel_r, 3) == rel_r
    chain = BinRelation.from_pairs(3, [(0, 1), (1, 2)])
    assert relation_power(chain, 2).pairs == [(0, 2)]
    with pytest.raises(PermutabError):
        relation_power(rel_r, 0)


def test_properties(rel_r):
    props = properties(rel_r)
    assert props.reflexive and props.transitive and not props.symmetric
    assert props.preorder and not props.equivalence


def test_transitive_closure():
    chain = BinRelation.from_pairs(3, [(0, 1), (1, 2)])
    assert transitive_closure(chain).pairs == [(0, 1), (0, 2), (1, 2)]


def test_compatibility_on_subtraction_algebra(subtr_a, rel_r):
    assert is_compatible(rel_r, subtr_a).holds
    assert is_compatible(converse(rel_r), subtr_a).holds

    bad = BinRelation.from_pairs(3, DIAG3 + [(0, 1)])
    report = is_compatible(bad, subtr_a)
    assert report.fails
    assert report.witness["symbol"] == "s"
    assert tuple(report.witness["image"]) not in bad

    assert is_compatible(BinRelation.empty(3), subtr_a).witness["symbol"] == "0"


def test_compatible_closure(subtr_a):
    closed = compatible_closure(subtr_a, BinRelation.from_pairs(3, DIAG3 + [(0, 1)]))
    assert is_compatible(closed, subtr_a).holds


def test_congruence_generated(subtr_a, rel_r):
    generated = congruence_generated(subtr_a, rel_r)
    assert generated.pairs == DIAG3 + [(1, 2), (2, 1)]
    assert generated.count == 5
    assert is_congruence(subtr_a, generated)
    assert not is_congruence(subtr_a, rel_r)


def test_enumerate_compatible(subtr_a, impl_x):
    congruences = enumerate_compatible(subtr_a, "equivalence")
    assert [c.count for c in congruences] == [3, 5, 9]
    assert congruences[0] == BinRelation.diagonal(3)
    assert congruences[-1] == BinRelation.full(3)

    reflexive = enumerate_compatible(impl_x, "reflexive")
    assert reflexive == [BinRelation.diagonal(2), BinRelation.full(2)]

    preorders = enumerate_compatible(subtr_a, "preorder")
    assert BinRelation.from_pairs(3, DIAG3 + [(1, 2)]) in preorders
    assert all(properties(r).preorder and is_compatible(r, subtr_a).holds for r in preorders)
    assert preorders == sorted(preorders, key=BinRelation.sort_key)


def test_enumerate_respects_carrier_limit(impl_z):
    with pytest.raises(CapExceeded):
        enumerate_compatible(impl_z, "reflexive", Limits(max_relation_carrier=2))
    with pytest.raises(PermutabError):
        enumerate_compatible(impl_z, "lattice")


def test_relation_frame_labels(rel_r):
    frame = relation_frame(rel_r, ["0", "a", "b"])
    assert frame.loc["a", "b"] == 1
    assert frame.loc["b", "a"] == 0


def _all_relations(size):
    return [BinRelation.from_mask(size, mask) for mask in range(1 << (size * size))]


def test_compose_is_associative_with_diagonal_unit():
    for size in (1, 2):
        relations = _all_relations(size)
        for r, s, t in itertools.product(relations, repeat=3):
            assert compose(compose(r, s), t) == compose(r, compose(s, t))
    diag = BinRelation.diagonal(3)
    for r in _all_relations(3):
        assert compose(diag, r) == r == compose(r, diag)


def test_converse_reverses_composition():
    relations = _all_relations(2)
    for r, s in itertools.product(relations, repeat=2):
        assert converse(compose(r, s)) == compose(converse(s), converse(r))
    for r in _all_relations(3):
        assert converse(converse(r)) == r


def test_powers_of_reflexive_relations_grow():
    for r in _all_relations(3):
        if not properties(r).reflexive:
            continue
        powers = [relation_power(r, k) for k in range(1, 5)]
        for lower, upper in zip(powers, powers[1:]):
            assert is_subrelation(lower, upper)
        assert powers[-1] == transitive_closure(r)


@pytest.mark.parametrize("name", ["impl-X", "impl-Z", "subtr-A", "z2-subtr", "trivial"])
def test_generated_congruence_is_intersection_of_congruences(name):
    alg = load_fixture(name).payload
    congruences = enumerate_compatible(alg, "equivalence")
    for r in _all_relations(alg.size):
        containing = [c for c in congruences if is_subrelation(r, c)]
        expected = functools.reduce(BinRelation.intersection, containing, BinRelation.full(alg.size))
        assert congruence_generated(alg, r) == expected


@pytest.mark.parametrize("name", ["impl-X", "impl-Z", "subtr-A", "z2-group"])
def test_compatible_relations_are_closed_under_calculus(name):
    alg = load_fixture(name).payload
    compatible = enumerate_compatible(alg, "any")
    assert all(is_compatible(r, alg).holds for r in compatible)
    for r in compatible:
        assert is_compatible(converse(r), alg).holds
    for r, s in itertools.product(compatible, repeat=2):
        assert is_compatible(compose(r, s), alg).holds
    for r in enumerate_compatible(alg, "reflexive"):
        assert is_compatible(transitive_closure(r), alg).holds


def test_closure_of_non_reflexive_relation_can_break_compatibility(impl_z):
    r = BinRelation.from_pairs(3, [(0, 0), (0, 1), (1, 2)])
    assert is_compatible(r, impl_z).holds
    closed = transitive_closure(r)
    assert (0, 2) in closed
    assert is_compatible(closed, impl_z).fails
