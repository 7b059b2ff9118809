"""Set-of-strings semantics for quantitative formulae and its cardinality.

A formula evaluates to a set of symbol strings (tuples whose letters are
universe elements or RelationValues), or to INFINITE.  Its count is the size
of that set.  Function symbols are looked up in FunTables; lfp nodes are
delegated to a handler supplied by the fixed-point engine.
"""
from __future__ import annotations

import math

from .boolsem import Assignment, BoolEvaluator, EMPTY_ASSIGNMENT, UnboundVariable
from .formula.ast import (Add, And, Bool, FOVar, FormulaError, FunAppFO, FunAppSO, LfpFO, LfpSO,
                          Mul, SOVar, SumFO, SumSO, _cached, flatten_and, flatten_mul,
                          formula_length, free_fo, free_so, has_lfp)
from .formula.fragments import function_free as _function_free, recognize_define, recognize_extend
from .structure import RelationValue, Structure, check_guard, enumerate_relations


class _Infinite:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITE"

    def __reduce__(self):
        return (_Infinite, ())


INFINITE = _Infinite()
EMPTY = frozenset()
EPSILON_SET = frozenset({()})


def concat_sets(s1, s2):
    """Lifted concatenation; an empty operand annihilates, even INFINITE."""
    if not s1 or not s2:
        return EMPTY
    if s1 is INFINITE or s2 is INFINITE:
        return INFINITE
    if s1 == EPSILON_SET:
        return s2
    if s2 == EPSILON_SET:
        return s1
    return frozenset(a + b for a in s1 for b in s2)


class StringBudgetExceeded(RuntimeError):
    """A concatenation would produce more strings than the evaluator allows."""


def union(s1, s2):
    if s1 is INFINITE or s2 is INFINITE:
        return INFINITE
    if not s1:
        return s2
    if not s2:
        return s1
    return s1 | s2


def cardinality(value) -> float | int:
    return math.inf if value is INFINITE else len(value)


class FunTable:
    """Interpretation of one function symbol: argument -> ExplValue, absent meaning empty.

    kind is "fo" (arguments are k-tuples of elements) or "so" (arguments
    are relations of arity k).  Every lookup is recorded in `looked_up` when
    that attribute is a set.
    """

    def __init__(self, kind: str, arity: int, entries: dict | None = None):
        if kind not in ("fo", "so"):
            raise ValueError("kind must be 'fo' or 'so'")
        self.kind = kind
        self.arity = arity
        self.entries = dict(entries or {})
        self.looked_up = None

    def _check(self, arg):
        if self.kind == "fo":
            if not (isinstance(arg, tuple) and len(arg) == self.arity):
                raise FormulaError(f"function argument {arg!r} is not a {self.arity}-tuple")
        elif not (isinstance(arg, RelationValue) and arg.arity == self.arity):
            raise FormulaError(f"function argument {arg!r} is not a relation of arity {self.arity}")

    def lookup(self, arg):
        self._check(arg)
        if self.looked_up is not None:
            self.looked_up.add(arg)
        return self.entries.get(arg, EMPTY)

    def __getitem__(self, arg):
        return self.entries.get(arg, EMPTY)

    def __setitem__(self, arg, value):
        self._check(arg)
        self.entries[arg] = value

    def copy(self) -> "FunTable":
        return FunTable(self.kind, self.arity, self.entries)

    def __le__(self, other: "FunTable") -> bool:
        for arg, value in self.entries.items():
            if not value:
                continue
            theirs = other[arg]
            if theirs is INFINITE:
                continue
            if value is INFINITE or not value <= theirs:
                return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, FunTable):
            return NotImplemented
        mine = {a: v for a, v in self.entries.items() if v}
        theirs = {a: v for a, v in other.entries.items() if v}
        return mine == theirs

    def __repr__(self) -> str:
        return f"FunTable({self.kind}, {self.arity}, {len(self.entries)} entries)"


def function_free(q) -> bool:
    return _cached(q, "_function_free", lambda: _function_free(q))


def _checkable(q) -> bool:
    return _cached(q, "_checkable", lambda: not has_lfp(q) and function_free(q))


def _y_free(q, y: str) -> bool:
    return y not in free_so(q)


class Evaluator:
    """Computes Expl over one structure.

    lfp_handler(node, asg, evaluator) evaluates nested lfp nodes; without one
    an lfp node is an error.  With check_lengths set, every value produced
    by an lfp-free, function-free node is checked against the length bound.
    """

    def __init__(self, structure: Structure, lfp_handler=None, check_lengths: bool = False,
                 bool_evaluator: BoolEvaluator | None = None):
        self.A = structure
        self.n = structure.n
        self.bools = bool_evaluator or BoolEvaluator(structure)
        self.lfp_handler = lfp_handler
        self.check_lengths = check_lengths
        self.length_checks = 0
        self.max_strings = None     # bound on |S1| * |S2| for one concatenation

    def holds(self, phi, asg: Assignment) -> bool:
        return self.bools.holds(phi, asg)

    def expl(self, q, asg: Assignment = EMPTY_ASSIGNMENT, F: dict | None = None):
        value = self._expl(q, asg, F or {})
        if self.check_lengths and value is not INFINITE and _checkable(q):
            bound = formula_length(q)
            self.length_checks += 1
            for s in value:
                if len(s) > bound:
                    raise AssertionError(f"string of length {len(s)} exceeds formula length {bound}")
        return value

    def _expl(self, q, asg, F):
        if isinstance(q, Bool):
            return EPSILON_SET if self.bools.holds(q.formula, asg) else EMPTY
        if isinstance(q, FOVar):
            if q.name not in asg.fo:
                raise UnboundVariable(f"unbound variable {q.name}")
            return frozenset({(asg.fo[q.name],)})
        if isinstance(q, SOVar):
            if q.name not in asg.so:
                raise UnboundVariable(f"unbound relation variable {q.name}")
            return frozenset({(asg.so[q.name],)})
        if isinstance(q, Add):
            left = self.expl(q.left, asg, F)
            return union(left, self.expl(q.right, asg, F))
        if isinstance(q, Mul):
            return self._chain(_factors(q), asg, F)
        if isinstance(q, SumFO):
            if q.var not in free_fo(q.body):
                return self.expl(q.body, asg, F)
            out = EMPTY
            for a in range(self.n):
                out = union(out, self.expl(q.body, asg.bind_fo(q.var, a), F))
            return out
        if isinstance(q, SumSO):
            return self._sum_so(q.var, q.arity, q.body, asg, F)
        if isinstance(q, FunAppFO):
            table = self._table(F, q.fun)
            try:
                arg = tuple(asg.fo[x] for x in q.args)
            except KeyError as exc:
                raise UnboundVariable(f"unbound variable {exc.args[0]}") from None
            return table.lookup(arg)
        if isinstance(q, FunAppSO):
            table = self._table(F, q.fun)
            if q.arg not in asg.so:
                raise UnboundVariable(f"unbound relation variable {q.arg}")
            return table.lookup(asg.so[q.arg])
        if isinstance(q, (LfpFO, LfpSO)):
            if self.lfp_handler is None:
                raise FormulaError("lfp node encountered; use the fixed-point engine")
            return self.lfp_handler(q, asg, self)
        raise FormulaError(f"not a quantitative formula: {q!r}")

    @staticmethod
    def _table(F, name):
        if name not in F:
            raise FormulaError(f"no interpretation for function symbol {name}")
        return F[name]

    def _concat(self, s1, s2):
        if self.max_strings is not None and s1 is not INFINITE and s2 is not INFINITE \
                and len(s1) * len(s2) > self.max_strings:
            raise StringBudgetExceeded(f"concatenation of {len(s1)} by {len(s2)} strings")
        return concat_sets(s1, s2)

    def _chain(self, factors, asg, F):
        """Concatenate factor values in order.

        Function-free factors are evaluated first; if one is empty the chain
        is empty and no table is consulted.  Otherwise every factor that
        mentions a function is evaluated, so the set of lookups made does
        not depend on the current tables.
        """
        values = [None] * len(factors)
        for i, factor in enumerate(factors):
            if function_free(factor):
                values[i] = self.expl(factor, asg, F)
                if not values[i]:
                    return EMPTY
        out = EPSILON_SET
        for i, factor in enumerate(factors):
            value = values[i] if values[i] is not None else self.expl(factor, asg, F)
            out = self._concat(out, value)
        return out

    def _sum_so(self, var, arity, body, asg, F):
        if _y_free(body, var):
            return self.expl(body, asg, F)
        if isinstance(body, Add):
            out = EMPTY
            for part in flatten_add_cached(body):
                out = union(out, self._sum_so(var, arity, part, asg, F))
            return out
        factors = _factors(body)
        lo, hi = 0, len(factors)
        while _y_free(factors[lo], var):
            lo += 1
        while _y_free(factors[hi - 1], var):
            hi -= 1
        outer = factors[:lo] + factors[hi:]
        if any(function_free(f) and not self.expl(f, asg, F) for f in outer):
            return EMPTY
        prefix = self._chain(factors[:lo], asg, F) if lo else EPSILON_SET
        middle = factors[lo:hi]
        if len(middle) == 1 and isinstance(middle[0], Add):
            core = self._sum_so(var, arity, middle[0], asg, F)
            suffix = self._chain(factors[hi:], asg, F) if hi < len(factors) else EPSILON_SET
            return self._concat(self._concat(prefix, core), suffix)
        candidates = self._determined(var, arity, middle, asg)
        if candidates is None:
            check_guard(self.n, arity)
            candidates = enumerate_relations(self.n, arity)
        core = EMPTY
        for rel in candidates:
            core = union(core, self._chain(middle, asg.bind_so(var, rel), F))
        suffix = self._chain(factors[hi:], asg, F) if hi < len(factors) else EPSILON_SET
        return self._concat(self._concat(prefix, core), suffix)

    def _determined(self, var, arity, factors, asg):
        """Relations for var that can make the chain nonempty, if a Bool factor pins var down."""
        for factor in factors:
            if not isinstance(factor, Bool):
                continue
            for conjunct in _conjunct_shapes(factor.formula):
                kind, shape = conjunct
                if kind == "define" and shape[0] == var and len(shape[1]) == arity:
                    rel = self.bools.relation_of(shape[2], shape[1], asg)
                    return [rel]
                if kind == "extend" and shape.target == var and len(shape.params) == arity \
                        and shape.source != var and shape.source in asg.so:
                    base = asg.so[shape.source]
                    added = self.bools.relation_of(shape.psi, shape.params, asg)
                    return [base.union(added.tuples)]
        return None


def _factors(q):
    return _cached(q, "_mul_parts", lambda: flatten_mul(q))


def flatten_add_cached(q):
    return _cached(q, "_add_parts", lambda: _flatten_add(q))


def _flatten_add(q):
    if isinstance(q, Add):
        return _flatten_add(q.left) + _flatten_add(q.right)
    return [q]


def _conjunct_shapes(phi):
    def compute():
        out = []
        for part in [phi] + (flatten_and(phi) if isinstance(phi, And) else []):
            shape = recognize_extend(part)
            if shape is not None:
                out.append(("extend", shape))
                continue
            shape = recognize_define(part)
            if shape is not None:
                out.append(("define", shape))
        return out
    return _cached(phi, "_shapes", compute)


def expl(alpha, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT, F: dict | None = None,
         check_lengths: bool = False):
    """Expl value of alpha: a frozenset of symbol strings, or INFINITE."""
    return Evaluator(A, check_lengths=check_lengths).expl(alpha, asg, F)


def count(alpha, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT, F: dict | None = None):
    """Cardinality of the Expl value; math.inf for INFINITE."""
    return cardinality(expl(alpha, A, asg, F))
