"""Finite ordered structures, relation values, symbol strings and their encodings.

The universe of every structure is ``{0, ..., n-1}`` with the natural order.
The order is built in and never stored as a relation.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

# Largest number of k-tuples for which all 2^(n^k) relations may be enumerated.
ENUMERATION_GUARD = 24


class StructureError(ValueError):
    """Raised for malformed structure files or inconsistent structures."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class GuardExceeded(ValueError):
    """Raised when a relation enumeration would exceed the feasibility guard."""


@dataclass(frozen=True)
class RelationValue:
    """An immutable k-ary relation over a universe {0..n-1}."""

    arity: int
    tuples: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.arity < 1:
            raise StructureError(f"arity must be positive, got {self.arity}")
        if not isinstance(self.tuples, frozenset):
            object.__setattr__(self, "tuples", frozenset(tuple(t) for t in self.tuples))
        for t in self.tuples:
            if len(t) != self.arity:
                raise StructureError(f"tuple {t} does not have arity {self.arity}")

    def __contains__(self, item) -> bool:
        return tuple(item) in self.tuples

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self) -> Iterator[tuple]:
        return iter(sorted(self.tuples))

    def __le__(self, other: "RelationValue") -> bool:
        return self.arity == other.arity and self.tuples <= other.tuples

    def __lt__(self, other: "RelationValue") -> bool:
        return self.arity == other.arity and self.tuples < other.tuples

    def union(self, other: Iterable[tuple]) -> "RelationValue":
        return RelationValue(self.arity, self.tuples | frozenset(tuple(t) for t in other))

    def sorted_tuples(self) -> list[tuple]:
        return sorted(self.tuples)

    def __repr__(self) -> str:
        body = " ".join("(" + ",".join(map(str, t)) + ")" for t in self.sorted_tuples())
        return f"Rel{self.arity}{{{body}}}"


def relation(arity: int, tuples: Iterable = ()) -> RelationValue:
    """Build a relation, accepting bare integers for unary tuples."""
    normalized = []
    for t in tuples:
        normalized.append((t,) if isinstance(t, int) else tuple(t))
    return RelationValue(arity, frozenset(normalized))


# A letter is a universe element (int) or a relation value.
Symbol = Union[int, RelationValue]
SymbolString = tuple  # tuple[Symbol, ...]; the empty tuple is epsilon
EPSILON: SymbolString = ()


@dataclass(frozen=True)
class Vocabulary:
    symbols: tuple  # tuple of (name, arity)

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise StructureError("duplicate relation name in vocabulary")
        for name, arity in self.symbols:
            if name in ("<=", "≤"):
                raise StructureError("the order symbol is implicit and cannot be declared")
            if arity < 1:
                raise StructureError(f"relation {name} must have positive arity")

    def arity(self, name: str) -> int:
        for sym, arity in self.symbols:
            if sym == name:
                return arity
        raise KeyError(name)


@dataclass(frozen=True)
class Structure:
    """A finite ordered structure over {0..n-1}."""

    n: int
    relations: Mapping[str, RelationValue] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise StructureError("universe must be nonempty")
        for name, rel in self.relations.items():
            if name in ("<=", "≤"):
                raise StructureError("the order symbol is implicit and cannot be declared")
            for t in rel.tuples:
                for a in t:
                    if not 0 <= a < self.n:
                        raise StructureError(f"element {a} of relation {name} out of range")
        object.__setattr__(self, "relations", dict(self.relations))

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.relations.items(), key=lambda kv: kv[0]))))

    @property
    def universe(self) -> range:
        return range(self.n)

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(tuple((name, rel.arity) for name, rel in self.relations.items()))

    def __getitem__(self, name: str) -> RelationValue:
        return self.relations[name]

    def to_text(self) -> str:
        lines = [f"universe {self.n}"]
        for name, rel in self.relations.items():
            body = " ".join("(" + ",".join(map(str, t)) + ")" for t in rel.sorted_tuples())
            lines.append(f"relation {name} {rel.arity} {{ {body} }}")
        return "\n".join(lines) + "\n"


_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<tok>[A-Za-z_][A-Za-z0-9_']*|\d+|<=|[{}(),]|\S)")


def _tokens(text: str):
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group("tok")
        if tok is not None:
            yield tok, line, m.start() - line_start + 1
        chunk = m.group(0)
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + chunk.rfind("\n") + 1


def parse_structure(text: str) -> Structure:
    """Parse the line-oriented structure format.

    ``universe <n>`` followed by ``relation <name> <arity> { (a,b) ... }``
    blocks; ``#`` starts a comment.
    """
    toks = list(_tokens(text))
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None, None)

    def expect(pred, what):
        nonlocal pos
        tok, line, col = peek()
        if tok is None:
            last = toks[-1] if toks else (None, 1, 1)
            raise StructureError(f"expected {what}, found end of input", last[1], last[2])
        if not pred(tok):
            raise StructureError(f"expected {what}, found {tok!r}", line, col)
        pos += 1
        return tok, line, col

    expect(lambda t: t == "universe", "'universe'")
    n_tok, line, col = expect(str.isdigit, "universe size")
    n = int(n_tok)
    if n < 1:
        raise StructureError("universe must be nonempty", line, col)

    relations: dict[str, RelationValue] = {}
    while peek()[0] is not None:
        expect(lambda t: t == "relation", "'relation'")
        name, nline, ncol = expect(lambda t: t[0].isalpha() or t[0] == "_" or t in ("<=", "≤"), "relation name")
        if name in ("<=", "≤"):
            raise StructureError("the order symbol is implicit and cannot be declared", nline, ncol)
        if name in relations:
            raise StructureError(f"duplicate relation {name}", nline, ncol)
        arity_tok, aline, acol = expect(str.isdigit, "arity")
        arity = int(arity_tok)
        if arity < 1:
            raise StructureError("arity must be positive", aline, acol)
        expect(lambda t: t == "{", "'{'")
        tuples = set()
        while peek()[0] == "(":
            _, tline, tcol = expect(lambda t: t == "(", "'('")
            elems = []
            while True:
                e, eline, ecol = expect(str.isdigit, "element")
                if int(e) >= n:
                    raise StructureError(f"element {e} out of range for universe {n}", eline, ecol)
                elems.append(int(e))
                sep, _, _ = expect(lambda t: t in (",", ")"), "',' or ')'")
                if sep == ")":
                    break
            if len(elems) != arity:
                raise StructureError(
                    f"arity mismatch: relation {name} has arity {arity}, tuple has {len(elems)}",
                    tline, tcol)
            tuples.add(tuple(elems))
        expect(lambda t: t == "}", "'}'")
        relations[name] = RelationValue(arity, frozenset(tuples))
    return Structure(n, relations)


def all_tuples(n: int, k: int) -> list[tuple]:
    """All k-tuples over {0..n-1} in lexicographic order."""
    return list(itertools.product(range(n), repeat=k))


def check_guard(n: int, k: int) -> None:
    if n ** k > ENUMERATION_GUARD:
        raise GuardExceeded(
            f"enumerating relations of arity {k} over {n} elements needs 2^{n ** k} cases "
            f"(guard allows n^k <= {ENUMERATION_GUARD})")


def enumerate_relations(n: int, k: int) -> Iterator[RelationValue]:
    """Yield all 2^(n^k) relations of arity k.

    The order is binary counting over characteristic vectors, where the
    tuple of lexicographic rank i contributes bit i.  So for n=2, k=1 the
    order is {}, {0}, {1}, {0,1}.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    check_guard(n, k)
    tuples = all_tuples(n, k)
    for mask in range(1 << len(tuples)):
        yield RelationValue(k, frozenset(t for i, t in enumerate(tuples) if mask >> i & 1))


def element_bits(n: int) -> int:
    return math.ceil(math.log2(n)) if n > 1 else 0


def arity_tag_bits(max_arity: int) -> int:
    return max(1, max_arity.bit_length())


def encode_relation(rel: RelationValue, n: int) -> str:
    """Characteristic vector in tuple-lexicographic order (no tag)."""
    return "".join("1" if t in rel.tuples else "0" for t in itertools.product(range(n), repeat=rel.arity))


def encode_string(s: SymbolString, ctx: Structure, max_arity: int) -> str:
    """Binary encoding of a symbol string.

    Elements take ceil(log2 n) bits.  Relations are a fixed-width arity tag
    followed by their characteristic vector.
    """
    n = ctx.n
    width = element_bits(n)
    tag_width = arity_tag_bits(max_arity)
    out = []
    for letter in s:
        if isinstance(letter, RelationValue):
            if letter.arity > max_arity:
                raise ValueError(f"relation arity {letter.arity} exceeds max_arity {max_arity}")
            out.append(format(letter.arity, f"0{tag_width}b"))
            out.append(encode_relation(letter, n))
        else:
            if not 0 <= letter < n:
                raise ValueError(f"element {letter} out of range")
            out.append(format(letter, f"0{width}b") if width else "")
    return "".join(out)


def encode_structure(A: Structure) -> str:
    """A fixed injective bit encoding of a structure: unary size, then relations in name order."""
    parts = ["1" * A.n + "0"]
    for name in sorted(A.relations):
        parts.append(encode_relation(A.relations[name], A.n))
    return "".join(parts)


def string_length(s: SymbolString) -> int:
    return len(s)


def format_symbol(letter: Symbol) -> str:
    if isinstance(letter, RelationValue):
        return "{" + " ".join("(" + ",".join(map(str, t)) + ")" for t in letter.sorted_tuples()) + "}"
    return str(letter)


def format_string(s: SymbolString) -> str:
    return "ε" if not s else " ".join(format_symbol(x) for x in s)
