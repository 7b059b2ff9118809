"""First-order definitions of order-derived notions over an ordered universe.

Every helper returns a pure FO formula using only Eq, Leq and the
connectives.  Bound helper variables come from a Fresh supply so they never
capture user variables.
"""
from __future__ import annotations

import itertools

from .ast import (And, BoolFormula, Eq, ExistsFO, ForallFO, Leq, Not, Or, conj, disj)


class Fresh:
    """Supply of variable names that cannot clash with parsed identifiers."""

    def __init__(self, prefix: str = "_v"):
        self.prefix = prefix
        self.counter = itertools.count(1)

    def __call__(self) -> str:
        return f"{self.prefix}{next(self.counter)}"

    def many(self, k: int) -> tuple:
        return tuple(self() for _ in range(k))


def lt(x: str, y: str) -> BoolFormula:
    return And(Leq(x, y), Not(Eq(x, y)))


def neq(x: str, y: str) -> BoolFormula:
    return Not(Eq(x, y))


def is_min(x: str, fresh: Fresh) -> BoolFormula:
    w = fresh()
    return ForallFO(w, Leq(x, w))


def is_max(x: str, fresh: Fresh) -> BoolFormula:
    w = fresh()
    return ForallFO(w, Leq(w, x))


def succ(x: str, y: str, fresh: Fresh) -> BoolFormula:
    """y is the immediate successor of x."""
    w = fresh()
    return And(lt(x, y), Not(ExistsFO(w, And(lt(x, w), lt(w, y)))))


def elem(x: str, d: int, fresh: Fresh) -> BoolFormula:
    """x is the d-th element of the universe (0-based)."""
    if d == 0:
        return is_min(x, fresh)
    w = fresh()
    return ExistsFO(w, And(elem(w, d - 1, fresh), succ(w, x, fresh)))


def tuple_eq(xs, ys) -> BoolFormula:
    return conj(*(Eq(x, y) for x, y in zip(xs, ys, strict=True)))


def tuple_lt(xs, ys) -> BoolFormula:
    """Strict lexicographic order on equal-length tuples."""
    xs, ys = tuple(xs), tuple(ys)
    if len(xs) != len(ys):
        raise ValueError("tuple comparison needs equal lengths")
    if len(xs) == 1:
        return lt(xs[0], ys[0])
    return Or(lt(xs[0], ys[0]), And(Eq(xs[0], ys[0]), tuple_lt(xs[1:], ys[1:])))


def tuple_leq(xs, ys) -> BoolFormula:
    return Or(tuple_lt(xs, ys), tuple_eq(xs, ys))


def tuple_min(xs, fresh: Fresh) -> BoolFormula:
    return conj(*(is_min(x, fresh) for x in xs))


def tuple_max(xs, fresh: Fresh) -> BoolFormula:
    return conj(*(is_max(x, fresh) for x in xs))


def tuple_succ(xs, ys, fresh: Fresh) -> BoolFormula:
    """ys is the lexicographic successor of xs."""
    xs, ys = tuple(xs), tuple(ys)
    if len(xs) != len(ys):
        raise ValueError("tuple successor needs equal lengths")
    k = len(xs)
    cases = []
    for i in range(k):
        parts = [Eq(xs[j], ys[j]) for j in range(i)]
        parts.append(succ(xs[i], ys[i], fresh))
        for j in range(i + 1, k):
            parts.append(is_max(xs[j], fresh))
            parts.append(is_min(ys[j], fresh))
        cases.append(conj(*parts))
    return disj(*cases)


def tuple_const(xs, index: int, n: int, fresh: Fresh) -> BoolFormula:
    """xs is the tuple of lexicographic rank index over an n-element universe."""
    xs = tuple(xs)
    k = len(xs)
    if not 0 <= index < n ** k:
        raise ValueError(f"tuple rank {index} out of range for n={n}, k={k}")
    digits = []
    for _ in range(k):
        digits.append(index % n)
        index //= n
    digits.reverse()
    return conj(*(elem(x, d, fresh) for x, d in zip(xs, digits)))
