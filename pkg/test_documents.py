import json

import pytest

from permutab.catfin import monoid_category, preorder_to_category
from permutab.config import Limits
from permutab.documents import SCHEMA, Document, dumps, load, loads, save
from permutab.errors import DocumentError
from permutab.paperlab import SUBTRACTION_SIGNATURE, load_fixture, subtraction_identities
from permutab.report import Report, Severity
from permutab.search import SearchSpec


def _round_trip(doc):
    return loads(dumps(doc))


def _algebra_payload(**changes):
    data = {"size": 2, "ops": {"dot": {"arity": 2, "table": [0, 1, 0, 0]}}}
    data.update(changes)
    return {"schema": SCHEMA, "kind": "algebra", "data": data}


def test_algebra_round_trip(impl_z, subtr_a):
    for alg in (impl_z, subtr_a):
        doc = _round_trip(Document.of(alg))
        assert doc.kind == "algebra"
        assert doc.body == alg


def test_relation_keeps_labels(rel_r):
    doc = _round_trip(Document.of(rel_r, ["0", "a", "b"]))
    assert doc.body == rel_r
    assert doc.labels == ("0", "a", "b")
    assert json.loads(dumps(doc))["data"]["pairs"] == [[0, 0], [1, 1], [1, 2], [2, 2]]


def test_category_round_trip(rel_r):
    for c in (preorder_to_category(rel_r, ["0", "a", "b"]), monoid_category([[0, 1], [1, 1]])):
        assert _round_trip(Document.of(c)).body == c


def test_maps_round_trip():
    bundle = load_fixture("span-fgst").payload
    doc = _round_trip(Document.of(bundle))
    assert doc.body == bundle
    assert doc.body["f"].mapping.image == bundle["f"].mapping.image


def test_identities_round_trip():
    for name in ("identities-implication", "identities-subtraction", "identities-perm(3)"):
        ids = load_fixture(name).payload
        doc = _round_trip(Document.of(ids))
        assert doc.body.signature == ids.signature
        assert doc.body.identities == ids.identities


def test_search_spec_round_trip():
    spec = SearchSpec(
        SUBTRACTION_SIGNATURE,
        subtraction_identities().identities,
        (2, 3),
        "has-noncongruence-preorder",
        Limits(search_candidate_cap=500, search_time_budget=1.5, workers=2),
        dedup=True,
    )
    assert _round_trip(Document.of(spec)).body == spec


def test_report_round_trip():
    failing = Report.failed("inner", {"pair": (1, 2), "nested": {"values": [(0, 1)]}}, "no", labels=("0", "a", "b"))
    report = Report.combine("outer", [failing.escalate(), Report.passed("other", "fine")])
    doc = _round_trip(Document.of(report))
    assert doc.body == report
    assert doc.body.severity is Severity.CRITICAL
    assert doc.body.find("inner").witness == {"pair": [1, 2], "nested": {"values": [[0, 1]]}}


def test_save_and_load(tmp_path, subtr_a):
    target = save(Document.of(subtr_a), tmp_path / "nested" / "a.json")
    assert target.exists()
    assert load(target).body == subtr_a
    with pytest.raises(DocumentError):
        load(tmp_path / "missing.json")


def test_malformed_json_reports_position():
    with pytest.raises(DocumentError) as exc:
        loads('{"schema": "permutab/1",\n  "kind": }')
    assert exc.value.position.startswith("line 2")


def test_schema_and_kind_are_checked():
    payload = _algebra_payload()
    payload["schema"] = "permutab/0"
    with pytest.raises(DocumentError) as exc:
        Document.from_dict(payload)
    assert exc.value.position == "$.schema"

    payload = _algebra_payload()
    payload["kind"] = "lattice"
    with pytest.raises(DocumentError) as exc:
        Document.from_dict(payload)
    assert exc.value.position == "$.kind"


def test_table_errors_carry_positions():
    with pytest.raises(DocumentError) as exc:
        Document.from_dict(_algebra_payload(ops={"dot": {"arity": 2, "table": [0, 1, 0]}}))
    assert exc.value.position == "$.data.ops.dot.table"

    with pytest.raises(DocumentError) as exc:
        Document.from_dict(_algebra_payload(ops={"dot": {"arity": 2, "table": [0, 1, 2, 0]}}))
    assert exc.value.position == "$.data.ops.dot.table[2]"

    with pytest.raises(DocumentError) as exc:
        Document.from_dict(_algebra_payload(labels=["only-one"]))
    assert exc.value.position == "$.data.labels"


def test_relation_pairs_must_be_in_range():
    payload = {"schema": SCHEMA, "kind": "relation", "data": {"size": 2, "pairs": [[0, 2]]}}
    with pytest.raises(DocumentError) as exc:
        Document.from_dict(payload)
    assert exc.value.position == "$.data.pairs[0]"


def test_plain_string_identities_are_accepted():
    payload = {
        "schema": SCHEMA,
        "kind": "identities",
        "data": {"signature": [["s", 2], ["0", 0]], "identities": ["s(x,x) = 0", "s(x,0) = x"]},
    }
    doc = Document.from_dict(payload)
    assert doc.body.identities == subtraction_identities().identities


def test_variable_names_must_not_shadow_symbols():
    payload = {
        "schema": SCHEMA,
        "kind": "identities",
        "data": {"signature": [["s", 2]], "identities": [{"variables": ["s"], "lhs": "s", "rhs": "s"}]},
    }
    with pytest.raises(DocumentError):
        Document.from_dict(payload)


def test_unknown_limit_fields_are_rejected():
    payload = {
        "schema": SCHEMA,
        "kind": "search-spec",
        "data": {"signature": [["f", 1]], "sizes": [1, 2], "limits": {"turbo": True}},
    }
    with pytest.raises(DocumentError) as exc:
        Document.from_dict(payload)
    assert exc.value.position == "$.data.limits"
