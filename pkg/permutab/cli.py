"""permutab command-line front end.

Exit codes: 0 = property holds / object produced, 1 = property fails (with a
witness), 2 = usage or input error, 3 = inconclusive (a cap or budget was hit).
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from . import catfin, maltsev, paperlab, relcalc, search
from .algebra import Algebra, IdentitySet, Signature, check_identities, parse_identity
from .catfin import FinCategory, GroupoidFailure
from .config import Limits
from .documents import Document, load, save
from .errors import CapExceeded, DocumentError, FixtureError, InconsistencyError, PermutabError
from .relcalc import BinRelation
from .report import Report, Status

__all__ = ["main", "build_parser", "resolve"]

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
EXIT_HOLDS, EXIT_FAILS, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3

_FROM_PREORDER = re.compile(r"from-preorder\((.+)\)")


@dataclass
class Outcome:
    """What a command hands back: a verdict, a produced object, or both."""

    report: Optional[Report] = None
    document: Optional[Document] = None
    frame: Optional[pd.DataFrame] = None

    @property
    def exit_code(self) -> int:
        if self.report is None:
            return EXIT_HOLDS
        return {Status.HOLDS: EXIT_HOLDS, Status.FAILS: EXIT_FAILS,
                Status.INCONCLUSIVE: EXIT_INCONCLUSIVE}[self.report.status]


# ---- argument types --------------------------------------------------------- #


def parse_sizes(value: str) -> Tuple[int, int]:
    """``"2..3"`` or ``"3"`` -> inclusive bounds."""
    match = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?", value)
    if match is None:
        raise argparse.ArgumentTypeError(f"sizes must look like a..b, got {value!r}")
    lo = int(match.group(1))
    hi = int(match.group(2)) if match.group(2) else lo
    return lo, hi


def parse_signature(value: str) -> Signature:
    """``"s:2,0:0"`` -> Signature."""
    symbols = []
    for part in filter(None, (p.strip() for p in value.split(","))):
        name, sep, arity = part.partition(":")
        if not sep or not arity.strip().isdigit():
            raise argparse.ArgumentTypeError(f"signature entries are name:arity, got {part!r}")
        symbols.append((name.strip(), int(arity)))
    try:
        return Signature(tuple(symbols))
    except PermutabError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


# ---- input resolution ------------------------------------------------------- #


def _fixture_document(name: str, kind: str) -> Document:
    candidates = [name]
    if kind == "identities" and not name.startswith("identities-"):
        candidates.append(f"identities-{name}")
    for candidate in candidates:
        try:
            fixture = paperlab.load_fixture(candidate)
        except FixtureError:
            continue
        labels = fixture.labels if fixture.kind == "relation" else None
        return Document(fixture.kind, fixture.payload, labels)
    raise DocumentError(f"{name!r} is neither a readable file nor a fixture name")


def resolve(text: str, kind: str) -> Document:
    """Load a document argument: ``from-preorder(<relation>)``, a file path, or a fixture name."""
    match = _FROM_PREORDER.fullmatch(text.strip())
    if match:
        if kind != "category":
            raise DocumentError(f"from-preorder(...) yields a category, but a {kind} is expected")
        relation = resolve(match.group(1), "relation")
        return Document("category", catfin.preorder_to_category(relation.body, relation.labels))
    path = Path(text)
    if path.is_file():
        doc = load(path)
    else:
        name = text[:-5] if text.endswith(".json") else text
        doc = _fixture_document(Path(name).name, kind)
    if doc.kind != kind:
        raise DocumentError(f"{text}: expected a {kind} document, got {doc.kind}")
    logging.debug("resolved %s -> %s", text, doc.kind)
    return doc


def _algebra(text: str) -> Algebra:
    return resolve(text, "algebra").body


def _relation(text: str) -> Tuple[BinRelation, Optional[Tuple[str, ...]]]:
    doc = resolve(text, "relation")
    return doc.body, doc.labels


def _category(text: str) -> FinCategory:
    return resolve(text, "category").body


def _limits(args: argparse.Namespace) -> Limits:
    return Limits.from_env().with_overrides(clone_cap=args.cap, search_candidate_cap=args.cap, workers=args.workers)


# ---- commands ---------------------------------------------------------------------- #


def cmd_check_identities(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    ids: IdentitySet = resolve(args.identities, "identities").body
    for identity in ids:
        identity.validate(alg.signature)
    return Outcome(check_identities(alg, ids))


def _relation_outcome(check: str, r: BinRelation, labels: Optional[Sequence[str]]) -> Outcome:
    report = Report.passed(check, f"{r.count} pairs", witness={"relation": r.pairs}, labels=labels)
    return Outcome(report, Document("relation", r, tuple(labels) if labels else None), relcalc.relation_frame(r, labels))


def cmd_relcalc(args: argparse.Namespace) -> Outcome:
    r, labels = _relation(args.relation)
    op = args.relcalc_op
    if op == "compose":
        if not args.other:
            raise PermutabError("relcalc compose needs --other")
        s, _ = _relation(args.other)
        return _relation_outcome("compose", relcalc.compose(r, s), labels)
    if op == "converse":
        return _relation_outcome("converse", relcalc.converse(r), labels)
    if op == "power":
        return _relation_outcome(f"power-{args.n}", relcalc.relation_power(r, args.n), labels)
    if op == "closure":
        return _relation_outcome("transitive-closure", relcalc.transitive_closure(r), labels)
    props = relcalc.properties(r)
    witness = {"reflexive": props.reflexive, "symmetric": props.symmetric, "transitive": props.transitive}
    message = ", ".join(f"{k}={v}" for k, v in witness.items())
    return Outcome(Report.passed("properties", message, witness=witness, labels=labels),
                   frame=relcalc.relation_frame(r, labels))


def cmd_compatible(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    r, _ = _relation(args.relation)
    return Outcome(relcalc.is_compatible(r, alg))


def cmd_congruence_gen(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    r, _ = _relation(args.relation)
    return _relation_outcome("congruence-generated", relcalc.congruence_generated(alg, r), alg.labels)


def cmd_permutes(args: argparse.Namespace) -> Outcome:
    if args.algebra:
        alg = _algebra(args.algebra)
        return Outcome(maltsev.congruence_permutability_check(alg, args.n, _limits(args)).to_report("permutes"))
    if not (args.relation and args.other):
        raise PermutabError("permutes needs --algebra, or both --relation and --other")
    r, labels = _relation(args.relation)
    s, _ = _relation(args.other)
    report = maltsev.pair_permutes_at(r, s, args.n).to_report("permutes")
    return Outcome(Report(report.check, report.status, report.witness, report.message, labels=labels))


def cmd_hagemann(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    return Outcome(maltsev.hagemann_check(alg, args.n, _limits(args)).to_report("hagemann"))


def cmd_clone(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    limits = _limits(args)
    try:
        clone = maltsev.ternary_clone(alg, limits.clone_cap, limits.workers)
    except CapExceeded as exc:
        return Outcome(Report.inconclusive("clone", str(exc), labels=alg.labels))
    frame = pd.DataFrame(
        {"term": [op.describe() for op in clone.operations],
         "table": ["".join(alg.label(int(v)) for v in op.table) for op in clone.operations]}
    )
    report = Report.passed("clone", f"{len(clone)} ternary term operations", witness={"size": len(clone)},
                           labels=alg.labels)
    return Outcome(report, frame=frame if args.list else None)


def cmd_hm_terms(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    limits = _limits(args)
    return Outcome(maltsev.find_hm_terms(alg, args.n, limits.clone_cap, limits.workers).to_report(alg.labels))


def cmd_degree(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    limits = _limits(args)
    result = maltsev.permutability_degree(alg, args.max_n, limits.clone_cap, limits.workers)
    return Outcome(result.to_report(alg.labels))


def cmd_cross_validate(args: argparse.Namespace) -> Outcome:
    alg = _algebra(args.algebra)
    limits = _limits(args)
    return Outcome(maltsev.cross_validate(alg, args.max_n, limits.clone_cap, limits))


def _groupoidify(c: FinCategory) -> Report:
    outcome = catfin.groupoidify(c)
    if isinstance(outcome, GroupoidFailure):
        witness = {"beta": outcome.beta, "alpha": outcome.alpha}
        return Report.failed("groupoidify", witness, f"no inverse for {c.label(outcome.alpha)}", labels=c.labels)
    return Report.passed("groupoidify", "every morphism is invertible", witness={"inverse": list(outcome.inv)},
                         labels=c.labels)


def _thin(c: FinCategory) -> Report:
    if catfin.is_thin(c):
        return Report.passed("thin", labels=c.labels)
    seen: Dict[Tuple[int, int], int] = {}
    for m in range(c.morphisms):
        ends = (c.dom[m], c.cod[m])
        if ends in seen:
            return Report.failed("thin", {"morphism": [seen[ends], m]}, "parallel morphisms", labels=c.labels)
        seen[ends] = m
    raise InconsistencyError("is_thin disagrees with the parallel-morphism scan")


def cmd_category(args: argparse.Namespace) -> Outcome:
    op = args.category_op
    if op == "from-preorder":
        r, labels = _relation(args.relation)
        c = catfin.preorder_to_category(r, labels)
        return Outcome(document=Document("category", c), frame=catfin.composition_frame(c))
    c = _category(args.category)
    if op == "validate":
        return Outcome(catfin.validate_category(c))
    if op == "thin":
        return Outcome(_thin(c))
    if op == "to-preorder":
        r = catfin.category_to_relation(c)
        return _relation_outcome("to-preorder", r, c.object_labels)
    if op == "s-relation":
        return Outcome(catfin.s_properties(c), frame=catfin.composition_frame(c))
    if op == "cancel":
        return Outcome(catfin.has_left_cancellation(c))
    return Outcome(_groupoidify(c))


def cmd_groupoidify(args: argparse.Namespace) -> Outcome:
    return Outcome(_groupoidify(_category(args.category)))


def cmd_verify_paper(args: argparse.Namespace) -> Outcome:
    limits = _limits(args)
    part = args.part
    if part == "span":
        return Outcome(paperlab.verify_punctual_span())
    if part == "subtraction":
        return Outcome(paperlab.verify_subtraction_example())
    if part == "monoid":
        return Outcome(paperlab.verify_internal_monoids(args.max_size, limits))
    if part == "perm":
        return Outcome(paperlab.verify_perm_examples(limits))
    return Outcome(paperlab.verify_paper(limits))


def _search_spec(args: argparse.Namespace) -> search.SearchSpec:
    overrides = {"clone_cap": args.cap, "search_candidate_cap": args.cap, "workers": args.workers,
                 "search_time_budget": args.time_budget}
    if args.spec:
        spec: search.SearchSpec = resolve(args.spec, "search-spec").body
        return search.SearchSpec(spec.signature, spec.identities, spec.sizes, spec.predicate,
                                 spec.limits.with_overrides(**overrides), spec.dedup or args.dedup)
    if args.signature is None:
        raise PermutabError("search needs --spec or --signature")
    identities: List = []
    if args.identities:
        ids: IdentitySet = resolve(args.identities, "identities").body
        identities.extend(ids)
    identities.extend(parse_identity(law, args.signature) for law in args.law or ())
    limits = Limits.from_env().with_overrides(**overrides)
    return search.SearchSpec(args.signature, tuple(identities), args.sizes, args.predicate, limits, args.dedup)


def cmd_search(args: argparse.Namespace) -> Outcome:
    spec = _search_spec(args)
    if args.find:
        result = search.find_model(spec)
        document = Document("algebra", result.model) if result.model is not None else None
        frame = result.model.to_frame(result.model.signature.names[0]) if result.model is not None else None
        return Outcome(result.to_report(), document, frame)
    enumeration = search.enumerate_models(spec)
    if args.emit:
        for i, alg in enumerate(enumeration.models):
            save(Document("algebra", alg), Path(args.emit) / f"model-{alg.size}-{i:05d}.json")
        logging.info("wrote %d models to %s", len(enumeration.models), args.emit)
    return Outcome(enumeration.to_report(), frame=enumeration.summary_frame())


def cmd_fixtures(args: argparse.Namespace) -> Outcome:
    rows = paperlab.list_fixtures()
    if args.fixtures_op == "list":
        return Outcome(frame=pd.DataFrame(rows, columns=["name", "description"]))
    if args.fixtures_op == "show":
        kind = paperlab.load_fixture(args.name).kind
        return Outcome(document=_fixture_document(args.name, kind))
    written = []
    for name, _ in rows:
        if name == "identities-perm(n)":
            name = "identities-perm(2)"
        fixture = paperlab.load_fixture(name)
        doc = _fixture_document(name, fixture.kind)
        written.append(str(save(doc, Path(args.dir) / f"{name}.json")))
    report = Report.passed("fixtures-export", f"{len(written)} documents in {args.dir}", witness={"files": written})
    return Outcome(report)


# ---- parser ---------------------------------------------------------------------------- #


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the machine-readable report only")
    common.add_argument("--cap", type=int, help="clone / search cap (overrides PERMUTAB_CAP)")
    common.add_argument("--workers", type=int, help="worker processes for fan-out points (default: 1)")
    common.add_argument("--out", help="write the produced document (or the report) to this path")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    parser = argparse.ArgumentParser(prog="permutab", description="Finite algebra, relation and category checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Callable[[argparse.Namespace], Outcome], help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = command("check-identities", cmd_check_identities, "check identities exhaustively on an algebra")
    p.add_argument("--algebra", required=True)
    p.add_argument("--identities", required=True)

    p = command("relcalc", cmd_relcalc, "relation calculus")
    p.add_argument("relcalc_op", choices=["compose", "converse", "power", "closure", "properties"])
    p.add_argument("--relation", required=True)
    p.add_argument("--other")
    p.add_argument("--n", type=int, default=2)

    p = command("compatible", cmd_compatible, "is the relation compatible with every operation")
    p.add_argument("--algebra", required=True)
    p.add_argument("--relation", required=True)

    p = command("congruence-gen", cmd_congruence_gen, "congruence generated by a relation")
    p.add_argument("--algebra", required=True)
    p.add_argument("--relation", required=True)

    p = command("permutes", cmd_permutes, "n-permutability of a pair, or of all congruences of an algebra")
    p.add_argument("--algebra")
    p.add_argument("--relation")
    p.add_argument("--other")
    p.add_argument("--n", type=int, default=2)

    p = command("hagemann", cmd_hagemann, "Hagemann conditions on every compatible reflexive relation")
    p.add_argument("--algebra", required=True)
    p.add_argument("--n", type=int, required=True)

    p = command("clone", cmd_clone, "saturate the ternary clone")
    p.add_argument("--algebra", required=True)
    p.add_argument("--list", action="store_true", help="print every term operation")

    p = command("hm-terms", cmd_hm_terms, "search Hagemann-Mitschke terms")
    p.add_argument("--algebra", required=True)
    p.add_argument("--n", type=int, required=True)

    p = command("degree", cmd_degree, "least n with Hagemann-Mitschke terms")
    p.add_argument("--algebra", required=True)
    p.add_argument("--max-n", type=int, default=4)

    p = command("cross-validate", cmd_cross_validate, "instance-check the permutability implications")
    p.add_argument("--algebra", required=True)
    p.add_argument("--max-n", type=int, default=4)

    p = command("category", cmd_category, "finite category checks")
    p.add_argument("category_op", choices=["validate", "thin", "from-preorder", "to-preorder",
                                           "s-relation", "cancel", "groupoidify"])
    p.add_argument("--category")
    p.add_argument("--relation")

    p = command("groupoidify", cmd_groupoidify, "inverse map of a category, or the obstruction")
    p.add_argument("--category", required=True)

    p = command("verify-paper", cmd_verify_paper, "re-verify the worked examples")
    p.add_argument("part", nargs="?", choices=["span", "subtraction", "monoid", "perm"])
    p.add_argument("--max-size", type=int, default=3)

    p = command("search", cmd_search, "bounded model search")
    p.add_argument("--spec")
    p.add_argument("--signature", type=parse_signature)
    p.add_argument("--identities")
    p.add_argument("--law", action="append", help="identity such as 's(x,x) = 0' (repeatable)")
    p.add_argument("--sizes", type=parse_sizes, default=(1, 3))
    p.add_argument("--predicate", default="none")
    p.add_argument("--dedup", action="store_true")
    p.add_argument("--find", action="store_true", help="stop at the first model satisfying --predicate")
    p.add_argument("--emit", help="directory for the enumerated models")
    p.add_argument("--time-budget", type=float)

    p = command("fixtures", cmd_fixtures, "list, show or export fixtures")
    p.add_argument("fixtures_op", choices=["list", "show", "export"])
    p.add_argument("name", nargs="?")
    p.add_argument("--dir", default="fixtures")
    return parser


def _emit(outcome: Outcome, args: argparse.Namespace) -> None:
    if args.out:
        if outcome.document is not None:
            target = outcome.document
        elif outcome.report is not None:
            target = Document("report", outcome.report)
        else:
            raise PermutabError(f"{args.command} produces nothing to write for --out")
        save(target, args.out)
    if args.json:
        if outcome.report is not None:
            payload = outcome.report.to_dict()
        elif outcome.document is not None:
            payload = outcome.document.to_dict()
        else:
            payload = outcome.frame.to_dict(orient="records") if outcome.frame is not None else {}
        print(json.dumps(payload, ensure_ascii=False, indent=2))
        return
    if outcome.frame is not None:
        print(outcome.frame.to_string())
    elif outcome.document is not None and outcome.report is None:
        print(json.dumps(outcome.document.to_dict(), ensure_ascii=False, indent=2))
    if outcome.report is not None:
        print(outcome.report.to_text())


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format=LOG_FORMAT,
                        stream=sys.stderr)
    if args.command == "category":
        needed = "relation" if args.category_op == "from-preorder" else "category"
        if getattr(args, needed) is None:
            parser.error(f"category {args.category_op} needs --{needed}")
    if args.command == "fixtures" and args.fixtures_op == "show" and not args.name:
        parser.error("fixtures show needs a fixture name")
    if args.workers is not None and args.workers < 1:
        parser.error("--workers must be at least 1")

    try:
        outcome = args.handler(args)
        _emit(outcome, args)
    except CapExceeded as exc:
        logging.warning("%s", exc)
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except PermutabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return outcome.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
