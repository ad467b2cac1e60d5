import itertools

import numpy as np
import pytest

from permutab.errors import FixtureError, SignatureError
from permutab.maltsev import TermOperation, perm_algebra
from permutab.paperlab import (
    MonoidStructure,
    list_fixtures,
    load_fixture,
    pointed_element,
    verify_fixture_identities,
    verify_internal_monoids,
    verify_paper,
    verify_perm_algebra,
    verify_perm_examples,
    verify_punctual_span,
    verify_subtraction_example,
    verify_subtractive_monoid,
    z2_maltsev_operation,
)
from permutab.report import Severity, Status


def _mutations(alg):
    for (name, arity), table in zip(alg.signature, alg.tables):
        for args in itertools.product(range(alg.size), repeat=arity):
            for value in range(alg.size):
                if value != int(table[args]):
                    yield alg.with_entry(name, args, value)


def test_fixture_transcriptions():
    z = load_fixture("impl-Z").payload
    assert z.label(z.op("dot", 2, 2)) == "1"
    a = load_fixture("subtr-A").payload
    assert a.label(a.op("s", a.element("b"), a.element("0"))) == "b"
    r = load_fixture("rel-R")
    assert r.kind == "relation" and r.payload.count == 4
    assert r.labels == ("0", "a", "b")


def test_fixture_catalog():
    names = [name for name, _ in list_fixtures()]
    for expected in ("impl-X", "impl-Y", "impl-Z", "span-fgst", "subtr-A", "rel-R",
                     "identities-implication", "identities-subtraction", "identities-perm(n)"):
        assert expected in names
    assert names == sorted(names)
    assert len(load_fixture("identities-perm(3)").payload) == 3
    with pytest.raises(FixtureError):
        load_fixture("identities-perm(1)")
    with pytest.raises(FixtureError):
        load_fixture("impl-W")


def test_pointed_elements(impl_x, impl_z, subtr_a):
    assert pointed_element(impl_x) == 0
    assert pointed_element(impl_z) == 0
    assert pointed_element(subtr_a, "s") == 0


def test_fixture_identities_hold():
    assert verify_fixture_identities().holds


def test_punctual_span():
    report = verify_punctual_span()
    assert report.holds, report.to_text()
    for check in ("homomorphism:f", "homomorphism:g", "homomorphism:s", "homomorphism:t",
                  "f.s = id", "g.t = id", "g.s constant", "f.t constant"):
        assert report.find(check).holds
    assert "[0, 1, 2]" in report.find("pairing-not-surjective").message


def test_span_mutations_are_detected(impl_x, impl_y, impl_z):
    for mutated in _mutations(impl_x):
        assert not verify_punctual_span(x=mutated).holds
    for mutated in _mutations(impl_y):
        assert not verify_punctual_span(y=mutated).holds
    for mutated in _mutations(impl_z):
        assert not verify_punctual_span(z=mutated).holds


def test_subtraction_example():
    report = verify_subtraction_example()
    assert report.holds, report.to_text()
    assert "(2, 1)" in report.find("congruence-generated").message


def test_subtraction_mutations_are_detected(subtr_a, rel_r):
    for mutated in _mutations(subtr_a):
        assert not verify_subtraction_example(mutated, rel_r).holds


def test_subtractive_monoid_on_two_element_group(z2_subtr):
    xor = MonoidStructure(2, [[0, 1], [1, 0]], 0)
    report = verify_subtractive_monoid(z2_subtr, xor)
    assert report.holds, report.to_text()
    assert report.find("addition-formula").holds


def test_subtractive_monoid_precondition_failure(z2_subtr):
    join = MonoidStructure(2, [[0, 1], [1, 1]], 0)
    report = verify_subtractive_monoid(z2_subtr, join)
    assert report.find("monoid-laws").holds
    assert report.find("plus-homomorphism").fails
    assert report.find("conclusions").status is Status.INCONCLUSIVE
    assert report.severity is Severity.NORMAL


def test_subtractive_monoid_needs_subtraction_signature(impl_x):
    with pytest.raises(SignatureError):
        verify_subtractive_monoid(impl_x, MonoidStructure(2, [[0, 1], [1, 0]], 0))


def test_perm_algebra_checks():
    maltsev = perm_algebra(2, [z2_maltsev_operation()])
    assert verify_perm_algebra(maltsev, 2).holds

    first = TermOperation(2, 3, np.indices((2, 2, 2)).reshape(3, -1)[0])
    report = verify_perm_algebra(perm_algebra(2, [first]), 2)
    assert report.fails
    identities = report.find("perm-identities")
    assert identities.fails
    assert report.find("hagemann") is None

    with pytest.raises(SignatureError):
        verify_perm_algebra(maltsev, 3)


def test_perm_examples():
    report = verify_perm_examples()
    assert report.holds, report.to_text()
    assert len(report.children) == 2


def test_internal_monoids_up_to_three_elements():
    report = verify_internal_monoids(3)
    assert report.holds, report.to_text()
    assert "internal monoids on 248 algebras" in report.message


def test_full_regression():
    report = verify_paper()
    assert report.holds, report.to_text()
    assert report.find("hagemann-fails-on-A").holds
    assert report.find("degree:impl-X").holds
