import argparse
import json

import pytest

from permutab.cli import build_parser, main, parse_signature, parse_sizes
from permutab.documents import load


def test_argument_types():
    assert parse_sizes("2..3") == (2, 3)
    assert parse_sizes("4") == (4, 4)
    assert parse_signature("s:2,0:0").symbols == (("s", 2), ("0", 0))
    with pytest.raises(argparse.ArgumentTypeError):
        parse_sizes("two")
    with pytest.raises(argparse.ArgumentTypeError):
        parse_signature("s2")


def test_parser_lists_every_command():
    parser = build_parser()
    for command in ("check-identities", "relcalc", "compatible", "congruence-gen", "permutes", "hagemann",
                    "clone", "hm-terms", "degree", "cross-validate", "category", "groupoidify",
                    "verify-paper", "search", "fixtures"):
        assert parser.parse_args(_minimal(command)).command == command


def _minimal(command):
    extra = {
        "check-identities": ["--algebra", "impl-Z", "--identities", "implication"],
        "relcalc": ["properties", "--relation", "rel-R"],
        "compatible": ["--algebra", "subtr-A", "--relation", "rel-R"],
        "congruence-gen": ["--algebra", "subtr-A", "--relation", "rel-R"],
        "permutes": [],
        "hagemann": ["--algebra", "subtr-A", "--n", "2"],
        "clone": ["--algebra", "impl-X"],
        "hm-terms": ["--algebra", "impl-X", "--n", "3"],
        "degree": ["--algebra", "impl-X"],
        "cross-validate": ["--algebra", "impl-X"],
        "category": ["validate", "--category", "monoid-z2"],
        "groupoidify": ["--category", "monoid-z2"],
        "verify-paper": [],
        "search": [],
        "fixtures": ["list"],
    }
    return [command] + extra[command]


def test_check_identities_holds(capsys):
    assert main(["check-identities", "--algebra", "impl-Z", "--identities", "implication"]) == 0


def test_hagemann_failure_prints_labels(capsys):
    assert main(["hagemann", "--algebra", "subtr-A.json", "--n", "3"]) == 1
    out = capsys.readouterr().out
    assert "[a, b]" in out


def test_groupoidify_from_preorder(capsys):
    assert main(["groupoidify", "--category", "from-preorder(rel-R.json)"]) == 1
    assert "(a,b)" in capsys.readouterr().out


def test_json_output_parses(capsys):
    assert main(["compatible", "--algebra", "subtr-A", "--relation", "rel-R", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["check"] == "compatible"
    assert payload["status"] == "holds"


def test_exported_fixtures_are_usable(tmp_path, capsys):
    assert main(["fixtures", "export", "--dir", str(tmp_path)]) == 0
    assert (tmp_path / "identities-perm(2).json").exists()
    assert main([
        "check-identities",
        "--algebra", str(tmp_path / "impl-Z.json"),
        "--identities", str(tmp_path / "identities-implication.json"),
    ]) == 0
    assert main(["congruence-gen", "--algebra", str(tmp_path / "subtr-A.json"),
                 "--relation", str(tmp_path / "rel-R.json")]) == 0


def test_cap_from_environment_is_inconclusive(monkeypatch, capsys):
    monkeypatch.setenv("PERMUTAB_CAP", "3")
    assert main(["clone", "--algebra", "impl-X"]) == 3
    monkeypatch.setenv("PERMUTAB_CAP", "lots")
    assert main(["clone", "--algebra", "impl-X"]) == 2


def test_input_errors_exit_two(tmp_path, capsys):
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["clone", "--algebra", str(broken)]) == 2
    assert "line 1" in capsys.readouterr().err
    assert main(["clone", "--algebra", "impl-W"]) == 2
    assert main(["clone", "--algebra", "rel-R"]) == 2
    assert main(["check-identities", "--algebra", "impl-Z", "--identities", "subtraction"]) == 2


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["category", "validate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["search", "--sizes", "a..b"])


def test_search_finds_noncongruence_preorder(tmp_path, capsys):
    out = tmp_path / "model.json"
    code = main([
        "search",
        "--signature", "s:2,0:0",
        "--law", "s(x,x) = 0",
        "--law", "s(x,0) = x",
        "--sizes", "2..3",
        "--predicate", "has-noncongruence-preorder",
        "--find",
        "--out", str(out),
    ])
    assert code == 0
    model = load(out).body
    assert model.size == 3


def test_search_enumerates_and_emits(tmp_path, capsys):
    emit = tmp_path / "models"
    assert main(["search", "--signature", "s:2,0:0", "--identities", "subtraction",
                 "--sizes", "2", "--emit", str(emit)]) == 0
    assert len(list(emit.glob("*.json"))) == 4


def test_search_reads_a_spec_document(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "schema": "permutab/1",
        "kind": "search-spec",
        "data": {"signature": [["s", 2], ["0", 0]], "identities": ["s(x,x) = 0", "s(x,0) = x"],
                 "sizes": [2, 2], "predicate": "has-noncongruence-preorder"},
    }), encoding="utf-8")
    assert main(["search", "--spec", str(spec), "--find"]) == 1


def test_verify_paper_span(capsys):
    assert main(["verify-paper", "span"]) == 0


def test_relcalc_commands(tmp_path, capsys):
    assert main(["relcalc", "properties", "--relation", "rel-R"]) == 0
    assert "symmetric=False" in capsys.readouterr().out
    out = tmp_path / "converse.json"
    assert main(["relcalc", "converse", "--relation", "rel-R", "--out", str(out)]) == 0
    doc = load(out)
    assert doc.kind == "relation"
    assert (2, 1) in doc.body
    assert doc.labels == ("0", "a", "b")


def test_permutes_on_algebra(capsys):
    assert main(["permutes", "--algebra", "subtr-A", "--n", "2"]) == 0


def test_category_commands(tmp_path, capsys):
    out = tmp_path / "preorder.json"
    assert main(["category", "from-preorder", "--relation", "rel-R", "--out", str(out)]) == 0
    assert main(["category", "validate", "--category", str(out)]) == 0
    assert main(["category", "thin", "--category", str(out)]) == 0
    assert main(["category", "s-relation", "--category", str(out)]) == 1
    assert main(["category", "cancel", "--category", "monoid-idempotent"]) == 1
    assert main(["groupoidify", "--category", "monoid-z2"]) == 0


def test_fixtures_list_and_show(capsys):
    assert main(["fixtures", "list"]) == 0
    assert "subtr-A" in capsys.readouterr().out
    assert main(["fixtures", "show", "rel-R", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["kind"] == "relation"
    assert main(["fixtures", "show", "nope"]) == 2


def test_out_without_anything_to_write(tmp_path, capsys):
    target = tmp_path / "listing.json"
    assert main(["fixtures", "list", "--out", str(target)]) == 2
    assert "nothing to write" in capsys.readouterr().err
    assert not target.exists()


def test_fixtures_list_as_json(capsys):
    assert main(["fixtures", "list", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert "rel-R" in [row["name"] for row in rows]
    assert all(set(row) == {"name", "description"} for row in rows)
