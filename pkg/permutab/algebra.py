"""Finite algebras as operation tables.

연산표(table)는 모두 numpy 배열로 보관하고, 가장 왼쪽 인자가 가장 큰
자리수가 되는 row-major 순서로 평탄화한다. 이 순서는 파일 포맷 계약의
일부다.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import AlgebraError, SignatureError, SizeMismatch, TermError
from .report import Report

__all__ = [
    "Signature",
    "Var",
    "App",
    "Term",
    "Identity",
    "IdentitySet",
    "Algebra",
    "FiniteMap",
    "eval_term",
    "tabulate_term",
    "check_identity",
    "check_identities",
    "product_algebra",
    "generated_subuniverse",
    "is_homomorphism",
    "parse_term",
    "parse_identity",
    "format_term",
    "max_var",
]

VARIABLE_NAMES = ("x", "y", "z", "u", "v", "w")


# ---- signatures and terms ------------------------------------------------ #


@dataclass(frozen=True)
class Signature:
    """Ordered operation symbols with their arities."""

    symbols: Tuple[Tuple[str, int], ...]

    def __post_init__(self) -> None:
        symbols = tuple((str(name), int(arity)) for name, arity in self.symbols)
        names = [name for name, _ in symbols]
        if len(set(names)) != len(names):
            raise SignatureError(f"duplicate symbol names in {names}")
        for name, arity in symbols:
            if not name:
                raise SignatureError("symbol names must be non-empty")
            if arity < 0:
                raise SignatureError(f"symbol {name!r} has negative arity {arity}")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def of(cls, *symbols: Tuple[str, int]) -> "Signature":
        return cls(tuple(symbols))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    @property
    def constants(self) -> Tuple[str, ...]:
        return tuple(name for name, arity in self.symbols if arity == 0)

    def arity(self, name: str) -> int:
        for symbol, arity in self.symbols:
            if symbol == name:
                return arity
        raise SignatureError(f"unknown symbol {name!r}")

    def __contains__(self, name: object) -> bool:
        return any(symbol == name for symbol, _ in self.symbols)

    def __iter__(self) -> Iterator[Tuple[str, int]]:
        return iter(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class Var:
    index: int

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class App:
    symbol: str
    args: Tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, App]


def max_var(term: Term) -> int:
    """Largest variable index occurring in ``term`` (-1 for ground terms)."""
    if isinstance(term, Var):
        return term.index
    return max((max_var(arg) for arg in term.args), default=-1)


def _validate_term(signature: Signature, term: Term, nvars: int, position: Tuple[int, ...] = ()) -> None:
    if isinstance(term, Var):
        if not 0 <= term.index < nvars:
            raise TermError(f"variable index {term.index} out of range for {nvars} variables", position)
        return
    if term.symbol not in signature:
        raise TermError(f"symbol {term.symbol!r} not in signature", position)
    arity = signature.arity(term.symbol)
    if arity != len(term.args):
        raise TermError(f"symbol {term.symbol!r} has arity {arity} but got {len(term.args)} arguments", position)
    for i, arg in enumerate(term.args):
        _validate_term(signature, arg, nvars, position + (i,))


def format_term(term: Term, names: Optional[Sequence[str]] = None) -> str:
    if isinstance(term, Var):
        if names is not None and term.index < len(names):
            return names[term.index]
        if term.index < len(VARIABLE_NAMES):
            return VARIABLE_NAMES[term.index]
        return f"x{term.index}"
    if not term.args:
        return term.symbol
    return f"{term.symbol}(" + ",".join(format_term(arg, names) for arg in term.args) + ")"


@dataclass(frozen=True)
class Identity:
    """An equation ``lhs = rhs`` over ``nvars`` universally quantified variables."""

    nvars: int
    lhs: Term
    rhs: Term
    names: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        needed = max(max_var(self.lhs), max_var(self.rhs)) + 1
        if self.nvars < needed:
            raise TermError(f"identity uses {needed} variables but declares {self.nvars}")

    def validate(self, signature: Signature) -> None:
        _validate_term(signature, self.lhs, self.nvars, (0,))
        _validate_term(signature, self.rhs, self.nvars, (1,))

    def __str__(self) -> str:
        return f"{format_term(self.lhs, self.names)} = {format_term(self.rhs, self.names)}"


_TOKEN = re.compile(r"\s*(?:([A-Za-z0-9_]+)|(\S))")


def _tokenize(text: str) -> List[str]:
    tokens: List[str] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None:
            break
        tokens.append(match.group(1) or match.group(2))
        pos = match.end()
    return tokens


class _TermParser:
    def __init__(self, signature: Signature, variables: Dict[str, int]) -> None:
        self.signature = signature
        self.variables = variables
        self.tokens: List[str] = []
        self.pos = 0

    def parse(self, text: str) -> Term:
        self.tokens = _tokenize(text)
        self.pos = 0
        term = self._term(())
        if self.pos != len(self.tokens):
            raise TermError(f"unexpected token {self.tokens[self.pos]!r} in {text!r}")
        return term

    def _peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _expect(self, token: str) -> None:
        if self._peek() != token:
            raise TermError(f"expected {token!r}, got {self._peek()!r}")
        self.pos += 1

    def _term(self, position: Tuple[int, ...]) -> Term:
        name = self._peek()
        if name is None or not re.fullmatch(r"[A-Za-z0-9_]+", name):
            raise TermError(f"expected a name, got {name!r}", position)
        self.pos += 1
        if name not in self.signature:
            if self._peek() == "(":
                raise TermError(f"unknown operation symbol {name!r}", position)
            if name not in self.variables:
                self.variables[name] = len(self.variables)
            return Var(self.variables[name])
        args: List[Term] = []
        if self._peek() == "(":
            self.pos += 1
            if self._peek() != ")":
                args.append(self._term(position + (0,)))
                while self._peek() == ",":
                    self.pos += 1
                    args.append(self._term(position + (len(args),)))
            self._expect(")")
        arity = self.signature.arity(name)
        if arity != len(args):
            raise TermError(f"symbol {name!r} has arity {arity} but got {len(args)} arguments", position)
        return App(name, tuple(args))


def parse_term(text: str, signature: Signature, variables: Optional[Dict[str, int]] = None) -> Term:
    """Parse prefix syntax ``f(t1,...,tk)``; unknown bare names are variables."""
    return _TermParser(signature, {} if variables is None else variables).parse(text)


def parse_identity(text: str, signature: Signature) -> Identity:
    if text.count("=") != 1:
        raise TermError(f"identity must contain exactly one '=': {text!r}")
    left, right = text.split("=")
    variables: Dict[str, int] = {}
    lhs = parse_term(left, signature, variables)
    rhs = parse_term(right, signature, variables)
    names = tuple(sorted(variables, key=variables.__getitem__))
    return Identity(len(variables), lhs, rhs, names)


@dataclass(frozen=True)
class IdentitySet:
    """Identities together with the signature they are written in."""

    signature: Signature
    identities: Tuple[Identity, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "identities", tuple(self.identities))
        for identity in self.identities:
            identity.validate(self.signature)

    @classmethod
    def parse(cls, signature: Signature, lines: Iterable[str]) -> "IdentitySet":
        return cls(signature, tuple(parse_identity(line, signature) for line in lines))

    def __iter__(self) -> Iterator[Identity]:
        return iter(self.identities)

    def __len__(self) -> int:
        return len(self.identities)


# ---- algebras ------------------------------------------------------------ #


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Algebra:
    """A finite carrier ``0..size-1`` with one total table per symbol."""

    size: int
    signature: Signature
    tables: Tuple[np.ndarray, ...]
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.size < 1:
            raise AlgebraError(f"carrier size must be positive, got {self.size}")
        if len(self.tables) != len(self.signature):
            raise AlgebraError(f"{len(self.signature)} symbols but {len(self.tables)} tables")
        frozen = []
        for (name, arity), raw in zip(self.signature, self.tables):
            table = np.array(raw, dtype=np.int64)
            if table.size != self.size ** arity:
                raise AlgebraError(
                    f"table for {name!r} needs {self.size ** arity} entries, got {table.size}"
                )
            table = table.reshape((self.size,) * arity)
            if table.size and (table.min() < 0 or table.max() >= self.size):
                raise AlgebraError(f"table for {name!r} has entries outside 0..{self.size - 1}")
            frozen.append(_freeze(table))
        object.__setattr__(self, "tables", tuple(frozen))
        if self.labels is not None:
            labels = tuple(str(label) for label in self.labels)
            if len(labels) != self.size:
                raise AlgebraError(f"{len(labels)} labels for a carrier of size {self.size}")
            object.__setattr__(self, "labels", labels)

    @classmethod
    def build(
        cls,
        size: int,
        signature: Signature,
        tables: Mapping[str, Any],
        labels: Optional[Sequence[str]] = None,
    ) -> "Algebra":
        """Create an algebra from flat or nested tables keyed by symbol name."""
        missing = [name for name in signature.names if name not in tables]
        if missing:
            raise AlgebraError(f"no table for symbols {missing}")
        extra = [name for name in tables if name not in signature]
        if extra:
            raise AlgebraError(f"tables for unknown symbols {extra}")
        return cls(size, signature, tuple(tables[name] for name in signature.names),
                   tuple(labels) if labels is not None else None)

    def table(self, symbol: str) -> np.ndarray:
        for (name, _), table in zip(self.signature, self.tables):
            if name == symbol:
                return table
        raise SignatureError(f"unknown symbol {symbol!r}")

    def flat_table(self, symbol: str) -> List[int]:
        return [int(v) for v in self.table(symbol).reshape(-1)]

    def op(self, symbol: str, *args: int) -> int:
        return int(self.table(symbol)[tuple(args)])

    def constant_values(self) -> Tuple[int, ...]:
        return tuple(int(self.table(name)[()]) for name in self.signature.constants)

    def label(self, element: int) -> str:
        return self.labels[element] if self.labels is not None else str(element)

    def element(self, label: str) -> int:
        """Inverse of ``label``."""
        names = self.labels if self.labels is not None else tuple(str(i) for i in range(self.size))
        try:
            return names.index(label)
        except ValueError as exc:
            raise AlgebraError(f"no element labelled {label!r}") from exc

    def with_entry(self, symbol: str, args: Sequence[int], value: int) -> "Algebra":
        tables = []
        for (name, _), table in zip(self.signature, self.tables):
            copy = np.array(table)
            if name == symbol:
                copy[tuple(args)] = value
            tables.append(copy)
        return Algebra(self.size, self.signature, tuple(tables), self.labels)

    def relabel(self, labels: Optional[Sequence[str]]) -> "Algebra":
        return Algebra(self.size, self.signature, self.tables, tuple(labels) if labels is not None else None)

    def key(self) -> Tuple[Any, ...]:
        return (self.size, self.signature.symbols, tuple(t.tobytes() for t in self.tables), self.labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Algebra) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        ops = ", ".join(f"{name}/{arity}" for name, arity in self.signature)
        return f"Algebra(size={self.size}, ops=[{ops}])"

    def to_frame(self, symbol: str) -> pd.DataFrame:
        """Render a table with element labels (binary tables as a square grid)."""
        table = self.table(symbol)
        names = [self.label(i) for i in range(self.size)]
        if table.ndim == 2:
            frame = pd.DataFrame(table, index=names, columns=names).apply(
                lambda col: col.map(self.label)
            )
            frame.index.name = symbol
            return frame
        rows = []
        for args in itertools.product(range(self.size), repeat=table.ndim):
            rows.append([self.label(a) for a in args] + [self.label(int(table[args]))])
        columns = [f"arg{i + 1}" for i in range(table.ndim)] + [symbol]
        return pd.DataFrame(rows, columns=columns)


# ---- evaluation ------------------------------------------------------------ #


def _eval(alg: Algebra, term: Term, env: Sequence[int], position: Tuple[int, ...]) -> int:
    if isinstance(term, Var):
        if not 0 <= term.index < len(env):
            raise TermError(f"variable index {term.index} out of range for environment of {len(env)}", position)
        return env[term.index]
    if term.symbol not in alg.signature:
        raise TermError(f"symbol {term.symbol!r} not in signature", position)
    arity = alg.signature.arity(term.symbol)
    if arity != len(term.args):
        raise TermError(f"symbol {term.symbol!r} has arity {arity} but got {len(term.args)} arguments", position)
    values = tuple(_eval(alg, arg, env, position + (i,)) for i, arg in enumerate(term.args))
    return int(alg.table(term.symbol)[values])


def eval_term(alg: Algebra, term: Term, env: Sequence[int]) -> int:
    """Value of ``term`` under ``env`` (a list of carrier elements)."""
    for value in env:
        if not 0 <= value < alg.size:
            raise AlgebraError(f"environment value {value} outside carrier of size {alg.size}")
    return _eval(alg, term, list(env), ())


def _tabulate(alg: Algebra, term: Term, grids: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if isinstance(term, Var):
        return grids[term.index]
    table = alg.table(term.symbol)
    if not term.args:
        return np.full(shape, table[()], dtype=np.int64)
    args = tuple(_tabulate(alg, arg, grids, shape) for arg in term.args)
    return table[args]


def tabulate_term(alg: Algebra, term: Term, nvars: int) -> np.ndarray:
    """Values of ``term`` over every environment, as an array of shape ``(size,)*nvars``."""
    _validate_term(alg.signature, term, nvars)
    shape = (alg.size,) * nvars
    grids = np.indices(shape, dtype=np.int64)
    return np.broadcast_to(_tabulate(alg, term, grids, shape), shape)


def check_identity(alg: Algebra, identity: Identity) -> Report:
    """Exhaustive check; the first violating environment in lexicographic order is the witness."""
    identity.validate(alg.signature)
    lhs = tabulate_term(alg, identity.lhs, identity.nvars)
    rhs = tabulate_term(alg, identity.rhs, identity.nvars)
    bad = np.flatnonzero((lhs != rhs).reshape(-1))
    if bad.size == 0:
        return Report.passed("identity", str(identity), labels=alg.labels)
    env = [int(v) for v in np.unravel_index(int(bad[0]), lhs.shape)]
    witness = {
        "identity": str(identity),
        "env": env,
        "lhs_value": int(lhs[tuple(env)]),
        "rhs_value": int(rhs[tuple(env)]),
    }
    return Report.failed("identity", witness, str(identity), labels=alg.labels)


def check_identities(alg: Algebra, identities: Iterable[Identity], check: str = "identities") -> Report:
    return Report.combine(check, (check_identity(alg, identity) for identity in identities), labels=alg.labels)


# ---- constructions ----------------------------------------------------------- #


def product_algebra(a: Algebra, b: Algebra) -> Algebra:
    """Componentwise product; the pair ``(x, y)`` has index ``x * b.size + y``."""
    if a.signature != b.signature:
        raise SignatureError(f"cannot multiply algebras over {a.signature.names} and {b.signature.names}")
    size = a.size * b.size
    tables = []
    for (name, arity), ta, tb in zip(a.signature, a.tables, b.tables):
        if arity == 0:
            tables.append(np.array(int(ta[()]) * b.size + int(tb[()])))
            continue
        grid = np.indices((size,) * arity, dtype=np.int64)
        xs, ys = grid // b.size, grid % b.size
        tables.append(ta[tuple(xs)] * b.size + tb[tuple(ys)])
    labels = tuple(f"({a.label(i // b.size)},{b.label(i % b.size)})" for i in range(size))
    return Algebra(size, a.signature, tuple(tables), labels)


def generated_subuniverse(alg: Algebra, seed: Iterable[int]) -> frozenset:
    """Least subset containing ``seed`` (and all constants) closed under the operations."""
    closed = set()
    for element in seed:
        if not 0 <= element < alg.size:
            raise AlgebraError(f"seed element {element} outside carrier of size {alg.size}")
        closed.add(int(element))
    closed.update(alg.constant_values())
    frontier = set(closed)
    while frontier:
        fresh = set()
        members = sorted(closed)
        for (name, arity), table in zip(alg.signature, alg.tables):
            if arity == 0:
                continue
            for args in itertools.product(members, repeat=arity):
                if frontier.isdisjoint(args):
                    continue
                value = int(table[args])
                if value not in closed:
                    fresh.add(value)
        closed |= fresh
        frontier = fresh
    return frozenset(closed)


# ---- maps -------------------------------------------------------------- #


@dataclass(frozen=True)
class FiniteMap:
    """A total function ``0..domain_size-1 -> 0..codomain_size-1``."""

    domain_size: int
    codomain_size: int
    image: Tuple[int, ...]

    def __post_init__(self) -> None:
        image = tuple(int(v) for v in self.image)
        if len(image) != self.domain_size:
            raise SizeMismatch(f"map lists {len(image)} images for a domain of size {self.domain_size}")
        for v in image:
            if not 0 <= v < self.codomain_size:
                raise AlgebraError(f"image {v} outside codomain of size {self.codomain_size}")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, size: int) -> "FiniteMap":
        return cls(size, size, tuple(range(size)))

    @classmethod
    def constant(cls, domain_size: int, codomain_size: int, value: int) -> "FiniteMap":
        return cls(domain_size, codomain_size, (value,) * domain_size)

    def __call__(self, element: int) -> int:
        return self.image[element]

    def after(self, other: "FiniteMap") -> "FiniteMap":
        """``self ∘ other`` (apply ``other`` first)."""
        if other.codomain_size != self.domain_size:
            raise SizeMismatch("maps are not composable")
        return FiniteMap(other.domain_size, self.codomain_size, tuple(self.image[v] for v in other.image))

    def image_set(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.image)))

    def is_constant(self) -> bool:
        return len(set(self.image)) <= 1


def is_homomorphism(mapping: FiniteMap, dom: Algebra, cod: Algebra) -> Report:
    if dom.signature != cod.signature:
        raise SignatureError("homomorphism check needs algebras of the same signature")
    if mapping.domain_size != dom.size or mapping.codomain_size != cod.size:
        raise SizeMismatch(
            f"map {mapping.domain_size}->{mapping.codomain_size} does not fit {dom.size}->{cod.size}"
        )
    image = np.array(mapping.image, dtype=np.int64)
    for (name, arity), t_dom, t_cod in zip(dom.signature, dom.tables, cod.tables):
        if arity == 0:
            lhs, rhs = image[t_dom[()]], t_cod[()]
            if lhs != rhs:
                witness = {"symbol": name, "args": [], "mapped_result": int(lhs), "result_of_mapped": int(rhs)}
                return Report.failed("homomorphism", witness, f"constant {name} not preserved", labels=dom.labels)
            continue
        grid = np.indices((dom.size,) * arity, dtype=np.int64)
        lhs = image[t_dom[tuple(grid)]]
        rhs = t_cod[tuple(image[g] for g in grid)]
        bad = np.flatnonzero((lhs != rhs).reshape(-1))
        if bad.size:
            args = [int(v) for v in np.unravel_index(int(bad[0]), lhs.shape)]
            witness = {
                "symbol": name,
                "args": args,
                "mapped_result": int(lhs[tuple(args)]),
                "result_of_mapped": int(rhs[tuple(args)]),
            }
            return Report.failed("homomorphism", witness, f"{name} not preserved", labels=dom.labels)
    return Report.passed("homomorphism", labels=dom.labels)
