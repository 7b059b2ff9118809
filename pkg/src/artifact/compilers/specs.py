"""Problem instances (graphs, DNF formulae, NFAs) and their text formats.

Graph files::

    vertices 4
    source 0          # optional
    0 1               # one directed edge per line

DNF files hold ``vars N`` (optional) and one clause per line as signed
1-based variable indices, e.g. ``1 -2 3``.

NFA files::

    states 3
    start 0
    accept 1 2
    length 2
    0 1 0             # edge from 0 to 1 labelled 0
"""
from __future__ import annotations

from dataclasses import dataclass


class SpecError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class GraphSpec:
    n: int
    edges: frozenset                 # directed pairs (u, v)
    source: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise SpecError("a graph needs at least one vertex")
        object.__setattr__(self, "edges", frozenset((int(u), int(v)) for u, v in self.edges))
        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise SpecError(f"edge ({u},{v}) out of range for {self.n} vertices")
        if self.source is not None and not 0 <= self.source < self.n:
            raise SpecError(f"source {self.source} out of range")

    def symmetrized(self) -> "GraphSpec":
        """Undirected version without self-loops."""
        sym = {(u, v) for u, v in self.edges if u != v} | {(v, u) for u, v in self.edges if u != v}
        return GraphSpec(self.n, frozenset(sym), self.source)


@dataclass(frozen=True)
class DnfSpec:
    variables: int
    clauses: tuple                   # tuple of tuples of nonzero ints

    def __post_init__(self):
        if self.variables < 1:
            raise SpecError("a DNF needs at least one variable")
        object.__setattr__(self, "clauses", tuple(tuple(int(l) for l in c) for c in self.clauses))
        if not self.clauses:
            raise SpecError("a DNF needs at least one clause")
        for c in self.clauses:
            if not c:
                raise SpecError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.variables:
                    raise SpecError(f"literal {lit} out of range for {self.variables} variables")


@dataclass(frozen=True)
class NfaSpec:
    states: int
    edges: frozenset                 # (source, target, letter) with letter 0 or 1
    start: int
    accepting: frozenset
    length: int                      # the bound m on word length

    def __post_init__(self):
        if self.states < 1:
            raise SpecError("an NFA needs at least one state")
        object.__setattr__(self, "edges", frozenset((int(p), int(q), int(a)) for p, q, a in self.edges))
        object.__setattr__(self, "accepting", frozenset(int(q) for q in self.accepting))
        if not 0 <= self.start < self.states:
            raise SpecError(f"start state {self.start} out of range")
        for p, q, a in self.edges:
            if not (0 <= p < self.states and 0 <= q < self.states) or a not in (0, 1):
                raise SpecError(f"bad edge ({p},{q},{a})")
        for q in self.accepting:
            if not 0 <= q < self.states:
                raise SpecError(f"accepting state {q} out of range")
        if self.length < 1:
            raise SpecError("length bound must be at least 1")


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _ints(words, lineno):
    try:
        return [int(w) for w in words]
    except ValueError:
        raise SpecError(f"expected integers, got {' '.join(words)!r}", lineno) from None


def parse_graph(text: str) -> GraphSpec:
    n, source, edges = None, None, []
    for lineno, words in _lines(text):
        if words[0] == "vertices":
            (n,) = _ints(words[1:], lineno)
        elif words[0] == "source":
            (source,) = _ints(words[1:], lineno)
        else:
            pair = _ints(words, lineno)
            if len(pair) != 2:
                raise SpecError("an edge line needs two vertices", lineno)
            edges.append(tuple(pair))
    if n is None:
        n = 1 + max((max(e) for e in edges), default=0)
    return GraphSpec(n, frozenset(edges), source)


def parse_dnf(text: str) -> DnfSpec:
    variables, clauses = None, []
    for lineno, words in _lines(text):
        if words[0] == "vars":
            (variables,) = _ints(words[1:], lineno)
        else:
            clauses.append(tuple(_ints(words, lineno)))
    if variables is None:
        variables = max((abs(l) for c in clauses for l in c), default=0)
    return DnfSpec(variables, tuple(clauses))


def parse_nfa(text: str) -> NfaSpec:
    states, start, accepting, length, edges = None, 0, [], None, []
    for lineno, words in _lines(text):
        head = words[0]
        if head == "states":
            (states,) = _ints(words[1:], lineno)
        elif head == "start":
            (start,) = _ints(words[1:], lineno)
        elif head == "accept":
            accepting += _ints(words[1:], lineno)
        elif head == "length":
            (length,) = _ints(words[1:], lineno)
        else:
            edge = _ints(words, lineno)
            if len(edge) != 3:
                raise SpecError("an edge line needs source, target and letter", lineno)
            edges.append(tuple(edge))
    if length is None:
        raise SpecError("missing 'length' line")
    if states is None:
        states = 1 + max([start, *accepting, *(max(p, q) for p, q, _ in edges)])
    return NfaSpec(states, frozenset(edges), start, frozenset(accepting), length)


def graph_text(g: GraphSpec) -> str:
    lines = [f"vertices {g.n}"]
    if g.source is not None:
        lines.append(f"source {g.source}")
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def dnf_text(d: DnfSpec) -> str:
    return "\n".join([f"vars {d.variables}"] + [" ".join(map(str, c)) for c in d.clauses]) + "\n"


def nfa_text(a: NfaSpec) -> str:
    lines = [f"states {a.states}", f"start {a.start}",
             "accept " + " ".join(map(str, sorted(a.accepting))), f"length {a.length}"]
    lines += [f"{p} {q} {x}" for p, q, x in sorted(a.edges)]
    return "\n".join(lines) + "\n"
