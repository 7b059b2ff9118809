"""Brute-force ground truth for the problem templates.

Nothing here touches the formula evaluator: answers come from subset,
assignment and word enumeration, a graph search, or the machine simulator.
"""
from __future__ import annotations

import itertools
from collections import deque

from ..machines import MachineSpec, run_tree
from .specs import DnfSpec, GraphSpec, NfaSpec, SpecError

MAX_SIZE = 8
MAX_LENGTH = 5


def _guard(size: int, what: str, limit: int = MAX_SIZE):
    if size > limit:
        raise SpecError(f"oracle limited to {limit} {what}, got {size}")


def _subsets(n: int):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def count_cliques(g: GraphSpec) -> int:
    """Vertex sets whose distinct members are pairwise joined in both directions."""
    _guard(g.n, "vertices")
    return sum(all((u, v) in g.edges for u in s for v in s if u != v) for s in _subsets(g.n))


def count_independent_sets(g: GraphSpec) -> int:
    _guard(g.n, "vertices")
    adjacent = {frozenset(e) for e in g.edges if e[0] != e[1]}
    return sum(all(frozenset(p) not in adjacent for p in itertools.combinations(s, 2))
               for s in _subsets(g.n))


def count_dnf(d: DnfSpec) -> int:
    _guard(d.variables, "variables")
    total = 0
    for values in itertools.product((False, True), repeat=d.variables):
        if any(all(values[abs(l) - 1] == (l > 0) for l in clause) for clause in d.clauses):
            total += 1
    return total


def accepted_words(a: NfaSpec) -> list[str]:
    _guard(a.states, "states")
    _guard(a.length, "letters", MAX_LENGTH)
    delta: dict = {}
    for p, q, x in a.edges:
        delta.setdefault((p, str(x)), set()).add(q)
    words = []
    for length in range(a.length + 1):
        for letters in itertools.product("01", repeat=length):
            current = {a.start}
            for ch in letters:
                current = set().union(*(delta.get((p, ch), ()) for p in current))
            if current & a.accepting:
                words.append("".join(letters))
    return words


def count_census(a: NfaSpec) -> int:
    return len(accepted_words(a))


def count_sinks(g: GraphSpec) -> int:
    """Vertices without out-edges that the source can reach."""
    if g.source is None:
        raise SpecError("sinks need a source vertex")
    out = {u: set() for u in range(g.n)}
    for u, v in g.edges:
        out[u].add(v)
    seen, queue = {g.source}, deque([g.source])
    while queue:
        u = queue.popleft()
        for v in out[u] - seen:
            seen.add(v)
            queue.append(v)
    return sum(1 for u in seen if not out[u])


def count_branchings(M: MachineSpec, word: str, clock: int) -> int:
    stats = run_tree(M, word, clock)
    if stats.clock_exceeded:
        raise SpecError(f"clock {clock} exceeded")
    return stats.branchings


_ORACLES = {
    "cliques": count_cliques,
    "is": count_independent_sets,
    "dnf": count_dnf,
    "census": count_census,
    "sinks": count_sinks,
}


def oracle_count(problem: str, spec, *args) -> int:
    """Dispatch on problem name: cliques, is, dnf, census, sinks or branchings."""
    if problem == "branchings":
        return count_branchings(spec, *args)
    try:
        fn = _ORACLES[problem]
    except KeyError:
        raise SpecError(f"unknown problem {problem!r}") from None
    return fn(spec)


PROBLEMS = tuple(_ORACLES) + ("branchings",)
