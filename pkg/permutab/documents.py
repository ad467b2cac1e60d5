"""JSON documents: ``{"schema": "permutab/1", "kind": ..., "data": ...}``.

Tables are flat row-major integer arrays, relations are sorted pair lists,
categories list their composition as ``[β, γ, γ∘β]`` triples.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .algebra import Algebra, FiniteMap, Identity, IdentitySet, Signature, Var, format_term, parse_term
from .catfin import FinCategory
from .config import Limits
from .errors import DocumentError, PermutabError
from .paperlab import MapBundle, NamedMap
from .relcalc import BinRelation
from .report import Report
from .search import SearchSpec

__all__ = ["SCHEMA", "KINDS", "Document", "dumps", "loads", "save", "load"]

SCHEMA = "permutab/1"
KINDS = ("algebra", "relation", "category", "maps", "identities", "search-spec", "report")

Body = Union[Algebra, BinRelation, FinCategory, MapBundle, IdentitySet, SearchSpec, Report]


@dataclass(frozen=True)
class Document:
    """A tagged, schema-versioned container; ``labels`` only accompanies relations."""

    kind: str
    body: Any
    labels: Optional[Tuple[str, ...]] = None

    @classmethod
    def of(cls, body: Body, labels: Optional[Sequence[str]] = None) -> "Document":
        for kind, types in _KIND_TYPES.items():
            if isinstance(body, types):
                return cls(kind, body, tuple(labels) if labels is not None else None)
        raise DocumentError(f"no document kind for {type(body).__name__}")

    def to_dict(self) -> Dict[str, Any]:
        return {"schema": SCHEMA, "kind": self.kind, "data": _ENCODERS[self.kind](self)}

    @classmethod
    def from_dict(cls, payload: Any) -> "Document":
        obj = _mapping(payload, "$")
        schema = obj.get("schema")
        if schema != SCHEMA:
            raise DocumentError(f"unsupported schema {schema!r}, expected {SCHEMA!r}", "$.schema")
        kind = obj.get("kind")
        if kind not in KINDS:
            raise DocumentError(f"unknown kind {kind!r}; expected one of {KINDS}", "$.kind")
        if "data" not in obj:
            raise DocumentError("missing data", "$.data")
        try:
            return _DECODERS[kind](obj["data"], "$.data")
        except DocumentError:
            raise
        except (PermutabError, KeyError, TypeError) as exc:
            raise DocumentError(f"invalid {kind} document: {exc}", "$.data") from exc


def dumps(doc: Document) -> str:
    return json.dumps(doc.to_dict(), ensure_ascii=False, indent=2)


def loads(text: str) -> Document:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"malformed JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc
    return Document.from_dict(payload)


def save(doc: Document, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dumps(doc) + "\n", encoding="utf-8")
    return target


def load(path: Union[str, Path]) -> Document:
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {source}: {exc}") from exc
    return loads(text)


# ---- field helpers --------------------------------------------------------- #


def _mapping(value: Any, position: str) -> Mapping[str, Any]:
    if not isinstance(value, dict):
        raise DocumentError("expected an object", position)
    return value


def _field(obj: Mapping[str, Any], key: str, position: str) -> Any:
    if key not in obj:
        raise DocumentError(f"missing field {key!r}", position)
    return obj[key]


def _int(value: Any, position: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DocumentError(f"expected an integer, got {value!r}", position)
    if minimum is not None and value < minimum:
        raise DocumentError(f"expected an integer >= {minimum}, got {value}", position)
    return value


def _ints(value: Any, position: str) -> List[int]:
    if not isinstance(value, list):
        raise DocumentError("expected an array of integers", position)
    return [_int(v, f"{position}[{i}]") for i, v in enumerate(value)]


def _labels(obj: Mapping[str, Any], position: str, key: str = "labels") -> Optional[Tuple[str, ...]]:
    raw = obj.get(key)
    if raw is None:
        return None
    if not isinstance(raw, list) or not all(isinstance(v, str) for v in raw):
        raise DocumentError(f"{key} must be an array of strings", f"{position}.{key}")
    return tuple(raw)


# ---- per-kind codecs ---------------------------------------------------------- #


def _encode_algebra(doc: Document) -> Dict[str, Any]:
    alg: Algebra = doc.body
    data: Dict[str, Any] = {
        "size": alg.size,
        "ops": {name: {"arity": arity, "table": alg.flat_table(name)} for name, arity in alg.signature},
    }
    if alg.labels is not None:
        data["labels"] = list(alg.labels)
    return data


def _decode_algebra_body(data: Any, position: str) -> Algebra:
    obj = _mapping(data, position)
    size = _int(_field(obj, "size", position), f"{position}.size", 1)
    ops = _mapping(_field(obj, "ops", position), f"{position}.ops")
    symbols, tables = [], []
    for name, spec in ops.items():
        where = f"{position}.ops.{name}"
        spec = _mapping(spec, where)
        arity = _int(_field(spec, "arity", where), f"{where}.arity", 0)
        table = _ints(_field(spec, "table", where), f"{where}.table")
        if len(table) != size ** arity:
            raise DocumentError(f"table needs {size ** arity} entries, got {len(table)}", f"{where}.table")
        for i, v in enumerate(table):
            if not 0 <= v < size:
                raise DocumentError(f"entry {v} outside 0..{size - 1}", f"{where}.table[{i}]")
        symbols.append((name, arity))
        tables.append(table)
    labels = _labels(obj, position)
    if labels is not None and len(labels) != size:
        raise DocumentError(f"{len(labels)} labels for size {size}", f"{position}.labels")
    return Algebra(size, Signature(tuple(symbols)), tuple(tables), labels)


def _decode_algebra(data: Any, position: str) -> Document:
    return Document("algebra", _decode_algebra_body(data, position))


def _encode_relation(doc: Document) -> Dict[str, Any]:
    r: BinRelation = doc.body
    data: Dict[str, Any] = {"size": r.size, "pairs": [list(pair) for pair in r.pairs]}
    if doc.labels is not None:
        data["labels"] = list(doc.labels)
    return data


def _decode_relation(data: Any, position: str) -> Document:
    obj = _mapping(data, position)
    size = _int(_field(obj, "size", position), f"{position}.size", 1)
    raw = _field(obj, "pairs", position)
    if not isinstance(raw, list):
        raise DocumentError("pairs must be an array", f"{position}.pairs")
    pairs = []
    for i, item in enumerate(raw):
        pair = _ints(item, f"{position}.pairs[{i}]")
        if len(pair) != 2 or not all(0 <= v < size for v in pair):
            raise DocumentError(f"pair {pair} is not a pair of elements of 0..{size - 1}", f"{position}.pairs[{i}]")
        pairs.append(pair)
    labels = _labels(obj, position)
    if labels is not None and len(labels) != size:
        raise DocumentError(f"{len(labels)} labels for size {size}", f"{position}.labels")
    return Document("relation", BinRelation.from_pairs(size, pairs), labels)


def _encode_category(doc: Document) -> Dict[str, Any]:
    c: FinCategory = doc.body
    data: Dict[str, Any] = {
        "objects": c.objects,
        "morphisms": c.morphisms,
        "dom": list(c.dom),
        "cod": list(c.cod),
        "id": list(c.ids),
        "comp": [list(t) for t in c.comp],
    }
    if c.labels is not None:
        data["labels"] = list(c.labels)
    if c.object_labels is not None:
        data["object_labels"] = list(c.object_labels)
    return data


def _decode_category(data: Any, position: str) -> Document:
    obj = _mapping(data, position)
    comp_raw = _field(obj, "comp", position)
    if not isinstance(comp_raw, list):
        raise DocumentError("comp must be an array of triples", f"{position}.comp")
    comp = []
    for i, item in enumerate(comp_raw):
        triple = _ints(item, f"{position}.comp[{i}]")
        if len(triple) != 3:
            raise DocumentError("composition entries are [beta, gamma, result]", f"{position}.comp[{i}]")
        comp.append(tuple(triple))
    category = FinCategory(
        objects=_int(_field(obj, "objects", position), f"{position}.objects", 0),
        morphisms=_int(_field(obj, "morphisms", position), f"{position}.morphisms", 0),
        dom=tuple(_ints(_field(obj, "dom", position), f"{position}.dom")),
        cod=tuple(_ints(_field(obj, "cod", position), f"{position}.cod")),
        ids=tuple(_ints(_field(obj, "id", position), f"{position}.id")),
        comp=tuple(comp),
        labels=_labels(obj, position),
        object_labels=_labels(obj, position, "object_labels"),
    )
    return Document("category", category)


def _encode_maps(doc: Document) -> Dict[str, Any]:
    bundle: MapBundle = doc.body
    return {
        "maps": [
            {
                "name": item.name,
                "source": item.source,
                "target": item.target,
                "domain_size": item.mapping.domain_size,
                "codomain_size": item.mapping.codomain_size,
                "image": list(item.mapping.image),
            }
            for item in bundle.maps
        ]
    }


def _decode_maps(data: Any, position: str) -> Document:
    obj = _mapping(data, position)
    raw = _field(obj, "maps", position)
    if not isinstance(raw, list):
        raise DocumentError("maps must be an array", f"{position}.maps")
    maps = []
    for i, item in enumerate(raw):
        where = f"{position}.maps[{i}]"
        entry = _mapping(item, where)
        mapping = FiniteMap(
            _int(_field(entry, "domain_size", where), f"{where}.domain_size", 0),
            _int(_field(entry, "codomain_size", where), f"{where}.codomain_size", 1),
            tuple(_ints(_field(entry, "image", where), f"{where}.image")),
        )
        maps.append(NamedMap(str(_field(entry, "name", where)), str(_field(entry, "source", where)),
                             str(_field(entry, "target", where)), mapping))
    return Document("maps", MapBundle(tuple(maps)))


def _encode_signature(signature: Signature) -> List[List[Any]]:
    return [[name, arity] for name, arity in signature]


def _decode_signature(raw: Any, position: str) -> Signature:
    if not isinstance(raw, list):
        raise DocumentError("signature must be an array of [name, arity]", position)
    symbols = []
    for i, item in enumerate(raw):
        if not isinstance(item, list) or len(item) != 2 or not isinstance(item[0], str):
            raise DocumentError("expected [name, arity]", f"{position}[{i}]")
        symbols.append((item[0], _int(item[1], f"{position}[{i}][1]", 0)))
    return Signature(tuple(symbols))


def _encode_identity(identity: Identity) -> Dict[str, Any]:
    names = identity.names or tuple(format_term(Var(i)) for i in range(identity.nvars))
    return {
        "variables": list(names),
        "lhs": format_term(identity.lhs, names),
        "rhs": format_term(identity.rhs, names),
    }


def _decode_identity(raw: Any, signature: Signature, position: str) -> Identity:
    if isinstance(raw, str):
        from .algebra import parse_identity

        return parse_identity(raw, signature)
    obj = _mapping(raw, position)
    names = _field(obj, "variables", position)
    if not isinstance(names, list) or not all(isinstance(v, str) for v in names):
        raise DocumentError("variables must be an array of names", f"{position}.variables")
    clash = [name for name in names if name in signature]
    if clash:
        raise DocumentError(f"variable names {clash} collide with operation symbols", f"{position}.variables")
    variables = {name: i for i, name in enumerate(names)}
    lhs = parse_term(str(_field(obj, "lhs", position)), signature, variables)
    rhs = parse_term(str(_field(obj, "rhs", position)), signature, variables)
    if len(variables) != len(names):
        raise DocumentError(f"undeclared variables {sorted(set(variables) - set(names))}", position)
    return Identity(len(names), lhs, rhs, tuple(names))


def _decode_identities_list(raw: Any, signature: Signature, position: str) -> Tuple[Identity, ...]:
    if not isinstance(raw, list):
        raise DocumentError("identities must be an array", position)
    return tuple(_decode_identity(item, signature, f"{position}[{i}]") for i, item in enumerate(raw))


def _encode_identities(doc: Document) -> Dict[str, Any]:
    ids: IdentitySet = doc.body
    return {
        "signature": _encode_signature(ids.signature),
        "identities": [_encode_identity(identity) for identity in ids],
    }


def _decode_identities(data: Any, position: str) -> Document:
    obj = _mapping(data, position)
    signature = _decode_signature(_field(obj, "signature", position), f"{position}.signature")
    identities = _decode_identities_list(_field(obj, "identities", position), signature, f"{position}.identities")
    return Document("identities", IdentitySet(signature, identities))


def _encode_search_spec(doc: Document) -> Dict[str, Any]:
    spec: SearchSpec = doc.body
    return {
        "signature": _encode_signature(spec.signature),
        "identities": [_encode_identity(identity) for identity in spec.identities],
        "sizes": list(spec.sizes),
        "predicate": spec.predicate,
        "dedup": spec.dedup,
        "limits": dataclasses.asdict(spec.limits),
    }


def _decode_search_spec(data: Any, position: str) -> Document:
    obj = _mapping(data, position)
    signature = _decode_signature(_field(obj, "signature", position), f"{position}.signature")
    identities = _decode_identities_list(obj.get("identities", []), signature, f"{position}.identities")
    sizes = _ints(_field(obj, "sizes", position), f"{position}.sizes")
    if len(sizes) != 2:
        raise DocumentError("sizes must be [lo, hi]", f"{position}.sizes")
    raw_limits = _mapping(obj.get("limits", {}), f"{position}.limits")
    known = {f.name for f in dataclasses.fields(Limits)}
    unknown = sorted(set(raw_limits) - known)
    if unknown:
        raise DocumentError(f"unknown limit fields {unknown}", f"{position}.limits")
    spec = SearchSpec(
        signature,
        identities,
        (sizes[0], sizes[1]),
        str(obj.get("predicate", "none")),
        Limits(**raw_limits),
        bool(obj.get("dedup", False)),
    )
    return Document("search-spec", spec)


def _encode_report(doc: Document) -> Dict[str, Any]:
    return doc.body.to_dict()


def _decode_report(data: Any, position: str) -> Document:
    try:
        return Document("report", Report.from_dict(_mapping(data, position)))
    except (KeyError, ValueError) as exc:
        raise DocumentError(f"invalid report: {exc}", position) from exc


_KIND_TYPES = {
    "algebra": (Algebra,),
    "relation": (BinRelation,),
    "category": (FinCategory,),
    "maps": (MapBundle,),
    "identities": (IdentitySet,),
    "search-spec": (SearchSpec,),
    "report": (Report,),
}

_ENCODERS = {
    "algebra": _encode_algebra,
    "relation": _encode_relation,
    "category": _encode_category,
    "maps": _encode_maps,
    "identities": _encode_identities,
    "search-spec": _encode_search_spec,
    "report": _encode_report,
}

_DECODERS = {
    "algebra": _decode_algebra,
    "relation": _decode_relation,
    "category": _decode_category,
    "maps": _decode_maps,
    "identities": _decode_identities,
    "search-spec": _decode_search_spec,
    "report": _decode_report,
}
