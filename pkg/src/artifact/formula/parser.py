"""Surface syntax for quantitative formulae.

Quantitative layer::

    q   ::= q + q | q * q | sum x, y. q | Sum X:k. q | [ b ] | x | $X
          | f(x, ..) | f(X) | lfp f(x, ..) = q in f(a, ..) | lfp f(X:k) = q in f(X0) | ( q )

Boolean layer (inside brackets)::

    b   ::= b <-> b | b -> b | b | b | b & b | !b | true | false
          | forall x, y. b | exists x. b | ForallR X:k. b | ExistsR X:k. b
          | lfpR P(x, ..) = b in P(a, ..) | R(x, ..) | X(x, ..) | t op t | X == Y
          | succ(x, y) | succ((x1, x2), (y1, y2))
    t   ::= x | min | max | (x1, .., xk)
    op  ::= = | != | <= | < | >= | >

``*`` binds tighter than ``+`` and quantifier bodies extend as far right as
possible.  Comparisons with ``min``/``max``, strict orders, successor and
tuple comparisons are macros that expand to pure FO, and so are ``min``/``max``
used as atom arguments, as in ``X(min)``.  ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import macros
from .ast import (Add, And, Bool, BOTTOM, Eq, ExistsFO, ExistsSO, FOVar, ForallFO, ForallSO,
                  FormulaError, FunAppFO, FunAppSO, Iff, Implies, Leq, LfpFO, LfpRel, LfpSO, Mul,
                  Not, Or, RelApp, SOApp, SOVar, SumFO, SumSO, TOP, forall, validate)


class ParseError(FormulaError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


_TOKEN = re.compile(
    r"\s+|#[^\n]*|(?P<tok><->|->|<=|>=|!=|==|[A-Za-z_][A-Za-z0-9_']*|\d+|[=<>!~&|()\[\],.:+*$])|(?P<bad>\S)")

KEYWORDS = {"sum", "Sum", "lfp", "in", "forall", "exists", "ForallR", "ExistsR", "lfpR",
            "true", "false", "min", "max", "succ"}


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        if m.group("bad") is not None:
            raise ParseError(f"unexpected character {m.group('bad')!r}", line, m.start() - line_start + 1)
        tok = m.group("tok")
        if tok is not None:
            toks.append(_Tok(tok, line, m.start() - line_start + 1))
        chunk = m.group(0)
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = m.start() + chunk.rfind("\n") + 1
    return toks


def _is_ident(t: str) -> bool:
    return bool(re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", t)) and t not in KEYWORDS


@dataclass
class _Scope:
    fo: frozenset = frozenset()
    so: dict = field(default_factory=dict)
    funs: dict = field(default_factory=dict)

    def with_fo(self, *names):
        return _Scope(self.fo | set(names), self.so, self.funs)

    def with_so(self, name, arity):
        return _Scope(self.fo, {**self.so, name: arity}, self.funs)

    def with_fun(self, name, sig):
        return _Scope(self.fo, self.so, {**self.funs, name: sig})


class _Parser:
    def __init__(self, text: str, free_so: dict, sentence: bool):
        self.toks = tokenize(text)
        self.pos = 0
        self.free_so = dict(free_so)
        self.sentence = sentence
        used = [int(t.text[2:]) for t in self.toks if re.fullmatch(r"_m\d+", t.text)]
        self.fresh = macros.Fresh("_m")
        for _ in range(max(used, default=0)):
            self.fresh()

    # token helpers
    def peek(self, offset: int = 0):
        i = self.pos + offset
        return self.toks[i].text if i < len(self.toks) else None

    def here(self):
        if self.pos < len(self.toks):
            t = self.toks[self.pos]
            return t.line, t.col
        if self.toks:
            t = self.toks[-1]
            return t.line, t.col + len(t.text)
        return 1, 1

    def error(self, message: str):
        line, col = self.here()
        return ParseError(message, line, col)

    def accept(self, text: str) -> bool:
        if self.peek() == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            found = self.peek()
            raise self.error(f"expected {text!r}, found {'end of input' if found is None else repr(found)}")

    def ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if t is None or not _is_ident(t):
            raise self.error(f"expected {what}, found {'end of input' if t is None else repr(t)}")
        self.pos += 1
        return t

    def integer(self) -> int:
        t = self.peek()
        if t is None or not t.isdigit():
            raise self.error("expected a positive integer arity")
        self.pos += 1
        value = int(t)
        if value < 1:
            raise self.error("arity must be positive")
        return value

    def ident_list(self) -> tuple:
        names = [self.ident("variable")]
        while self.accept(","):
            names.append(self.ident("variable"))
        return tuple(names)

    def atom_args(self, scope: _Scope):
        """Atom arguments; min and max become fresh variables pinned to the ends of the order."""
        args, ends = [], []
        while True:
            t = self.peek()
            if t in ("min", "max"):
                self.pos += 1
                w = self.fresh()
                ends.append((w, t))
                args.append(w)
            else:
                args.append(self.fo_use(self.ident("variable"), scope))
            if not self.accept(","):
                return tuple(args), ends

    def fo_use(self, name: str, scope: _Scope) -> str:
        if name not in scope.fo and self.sentence:
            raise self.error(f"unbound variable {name}")
        if name in scope.so:
            raise self.error(f"{name} is a relation variable, not an element variable")
        return name

    def so_use(self, name: str, scope: _Scope) -> int:
        if name in scope.so:
            return scope.so[name]
        if name in self.free_so and not self.sentence:
            return self.free_so[name]
        raise self.error(f"unbound relation variable {name}")

    # ------------------------------------------------------------- quantitative
    def parse_q(self, scope: _Scope):
        left = self.q_term(scope)
        while self.accept("+"):
            left = Add(left, self.q_term(scope))
        return left

    def q_term(self, scope: _Scope):
        left = self.q_factor(scope)
        while self.accept("*"):
            left = Mul(left, self.q_factor(scope))
        return left

    def q_factor(self, scope: _Scope):
        t = self.peek()
        if t is None:
            raise self.error("unexpected end of input")
        if t.isdigit():
            raise self.error(f"numeric literal {t} is not part of the formula language")
        if t == "sum":
            self.pos += 1
            names = self.ident_list()
            self.expect(".")
            body = self.parse_q(scope.with_fo(*names))
            for v in reversed(names):
                body = SumFO(v, body)
            return body
        if t == "Sum":
            self.pos += 1
            name = self.ident("relation variable")
            self.expect(":")
            arity = self.integer()
            self.expect(".")
            return SumSO(name, arity, self.parse_q(scope.with_so(name, arity)))
        if t == "lfp":
            return self.q_lfp(scope)
        if t == "[":
            self.pos += 1
            phi = self.parse_b(scope)
            self.expect("]")
            return Bool(phi)
        if t == "$":
            self.pos += 1
            name = self.ident("relation variable")
            self.so_use(name, scope)
            return SOVar(name)
        if t == "(":
            self.pos += 1
            inner = self.parse_q(scope)
            self.expect(")")
            return inner
        if _is_ident(t):
            self.pos += 1
            if self.peek() == "(":
                return self.q_funapp(t, scope)
            return FOVar(self.fo_use(t, scope))
        raise self.error(f"unexpected token {t!r}")

    def q_funapp(self, name: str, scope: _Scope):
        sig = scope.funs.get(name)
        if sig is None:
            raise self.error(f"unknown function symbol {name}")
        self.expect("(")
        args = self.ident_list()
        self.expect(")")
        if sig[0] == "so":
            if len(args) != 1:
                raise self.error(f"{name} takes one relation argument")
            if self.so_use(args[0], scope) != sig[1]:
                raise self.error(f"arity mismatch in argument of {name}")
            return FunAppSO(name, args[0])
        if len(args) != sig[1]:
            raise self.error(f"{name} expects {sig[1]} arguments, got {len(args)}")
        return FunAppFO(name, tuple(self.fo_use(a, scope) for a in args))

    def q_lfp(self, scope: _Scope):
        self.expect("lfp")
        fun = self.ident("function symbol")
        self.expect("(")
        first = self.ident("parameter")
        if self.accept(":"):
            arity = self.integer()
            self.expect(")")
            self.expect("=")
            body = self.parse_q(scope.with_so(first, arity).with_fun(fun, ("so", arity)))
            self.expect("in")
            if self.ident("function symbol") != fun:
                raise self.error(f"expected {fun} after 'in'")
            self.expect("(")
            arg = self.ident("relation variable")
            self.expect(")")
            if self.so_use(arg, scope) != arity:
                raise self.error(f"arity mismatch in argument of {fun}")
            return LfpSO(fun, first, arity, body, arg)
        params = [first]
        while self.accept(","):
            params.append(self.ident("parameter"))
        self.expect(")")
        if len(set(params)) != len(params):
            raise self.error("lfp parameters must be distinct")
        self.expect("=")
        body = self.parse_q(scope.with_fo(*params).with_fun(fun, ("fo", len(params))))
        self.expect("in")
        if self.ident("function symbol") != fun:
            raise self.error(f"expected {fun} after 'in'")
        self.expect("(")
        args = self.ident_list()
        self.expect(")")
        if len(args) != len(params):
            raise self.error(f"{fun} expects {len(params)} arguments, got {len(args)}")
        return LfpFO(fun, tuple(params), body, tuple(self.fo_use(a, scope) for a in args))

    # ------------------------------------------------------------------ boolean
    def parse_b(self, scope: _Scope):
        left = self.b_imp(scope)
        while self.accept("<->"):
            left = Iff(left, self.b_imp(scope))
        return left

    def b_imp(self, scope: _Scope):
        left = self.b_or(scope)
        if self.accept("->"):
            return Implies(left, self.b_imp(scope))
        return left

    def b_or(self, scope: _Scope):
        left = self.b_and(scope)
        while self.accept("|"):
            left = Or(left, self.b_and(scope))
        return left

    def b_and(self, scope: _Scope):
        left = self.b_unary(scope)
        while self.accept("&"):
            left = And(left, self.b_unary(scope))
        return left

    def b_unary(self, scope: _Scope):
        t = self.peek()
        if t in ("!", "~"):
            self.pos += 1
            return Not(self.b_unary(scope))
        if t in ("forall", "exists"):
            self.pos += 1
            names = self.ident_list()
            self.expect(".")
            body = self.parse_b(scope.with_fo(*names))
            node = ForallFO if t == "forall" else ExistsFO
            for v in reversed(names):
                body = node(v, body)
            return body
        if t in ("ForallR", "ExistsR"):
            self.pos += 1
            name = self.ident("relation variable")
            self.expect(":")
            arity = self.integer()
            self.expect(".")
            body = self.parse_b(scope.with_so(name, arity))
            return (ForallSO if t == "ForallR" else ExistsSO)(name, arity, body)
        if t == "lfpR":
            return self.b_lfp(scope)
        return self.b_atom(scope)

    def b_lfp(self, scope: _Scope):
        self.expect("lfpR")
        rel = self.ident("relation variable")
        self.expect("(")
        params = self.ident_list()
        self.expect(")")
        if len(set(params)) != len(params):
            raise self.error("lfp parameters must be distinct")
        self.expect("=")
        body = self.parse_b(scope.with_fo(*params).with_so(rel, len(params)))
        self.expect("in")
        if self.ident("relation variable") != rel:
            raise self.error(f"expected {rel} after 'in'")
        self.expect("(")
        args = tuple(self.fo_use(a, scope) for a in self.ident_list())
        self.expect(")")
        if len(args) != len(params):
            raise self.error(f"{rel} expects {len(params)} arguments")
        return LfpRel(rel, params, body, args)

    def b_atom(self, scope: _Scope):
        t = self.peek()
        if t is None:
            raise self.error("unexpected end of input")
        if t == "true":
            self.pos += 1
            return TOP
        if t == "false":
            self.pos += 1
            return BOTTOM
        if t == "succ":
            return self.b_succ(scope)
        if t == "(":
            saved = self.pos
            terms = self.try_tuple_term(scope)
            if terms is not None and self.peek() in ("=", "!=", "<=", "<", ">=", ">"):
                return self.comparison(terms, scope)
            self.pos = saved
            self.expect("(")
            inner = self.parse_b(scope)
            self.expect(")")
            return inner
        if t.isdigit():
            raise self.error(f"numeric literal {t} is not part of the formula language")
        if t in ("min", "max"):
            self.pos += 1
            return self.comparison((t,), scope)
        if _is_ident(t):
            self.pos += 1
            if self.peek() == "(":
                self.pos += 1
                args, ends = self.atom_args(scope)
                self.expect(")")
                if t in scope.so or (not self.sentence and t in self.free_so):
                    arity = self.so_use(t, scope)
                    if len(args) != arity:
                        raise self.error(f"{t} has arity {arity} but is applied to {len(args)} arguments")
                    atom = SOApp(t, args)
                else:
                    atom = RelApp(t, args)
                for w, which in reversed(ends):
                    end = macros.is_min(w, self.fresh) if which == "min" else macros.is_max(w, self.fresh)
                    atom = ExistsFO(w, And(end, atom))
                return atom
            if self.peek() == "==" or (self.peek() == "=" and self._is_so_name(t, scope)):
                return self.so_equality(t, scope)
            return self.comparison((t,), scope)
        raise self.error(f"unexpected token {t!r}")

    def _is_so_name(self, name: str, scope: _Scope) -> bool:
        return name in scope.so or (not self.sentence and name in self.free_so)

    def so_equality(self, left: str, scope: _Scope):
        self.pos += 1
        right = self.ident("relation variable")
        k1, k2 = self.so_use(left, scope), self.so_use(right, scope)
        if k1 != k2:
            raise self.error(f"cannot compare {left} and {right} of different arities")
        zs = self.fresh.many(k1)
        return forall(zs, Iff(SOApp(left, zs), SOApp(right, zs)))

    def try_tuple_term(self, scope: _Scope):
        if not self.accept("("):
            return None
        names = []
        while True:
            t = self.peek()
            if t is None or not (_is_ident(t) and t not in scope.so):
                return None
            self.pos += 1
            names.append(t)
            if self.accept(")"):
                return tuple(names)
            if not self.accept(","):
                return None

    def term(self, scope: _Scope):
        t = self.peek()
        if t in ("min", "max"):
            self.pos += 1
            return (t,)
        if t == "(":
            terms = self.try_tuple_term(scope)
            if terms is None:
                raise self.error("expected a variable tuple")
            return terms
        return (self.ident("variable"),)

    def comparison(self, left: tuple, scope: _Scope):
        op = self.peek()
        if op not in ("=", "!=", "<=", "<", ">=", ">"):
            raise self.error(f"expected a comparison operator, found {op!r}")
        self.pos += 1
        right = self.term(scope)
        return self.expand_comparison(left, op, right, scope)

    def expand_comparison(self, left, op, right, scope):
        fresh = self.fresh
        if left in (("min",), ("max",)) and right in (("min",), ("max",)):
            raise self.error("comparison needs at least one variable")
        if left in (("min",), ("max",)):
            left, right = right, left
            op = {"<=": ">=", ">=": "<=", "<": ">", ">": "<"}.get(op, op)
        for v in left:
            self.fo_use(v, scope)
        if right in (("min",), ("max",)):
            bound = right[0]
            if op in ("=", "!="):
                phi = macros.tuple_min(left, fresh) if bound == "min" else macros.tuple_max(left, fresh)
                return phi if op == "=" else Not(phi)
            if (op, bound) in (("<=", "max"), (">=", "min")):
                return TOP
            if (op, bound) in ((">", "max"), ("<", "min")):
                return BOTTOM
            phi = macros.tuple_max(left, fresh) if bound == "max" else macros.tuple_min(left, fresh)
            return Not(phi)
        for v in right:
            self.fo_use(v, scope)
        if len(left) != len(right):
            raise self.error("tuple comparison needs equal lengths")
        if len(left) == 1:
            x, y = left[0], right[0]
            return {"=": lambda: Eq(x, y), "!=": lambda: Not(Eq(x, y)), "<=": lambda: Leq(x, y),
                    "<": lambda: macros.lt(x, y), ">=": lambda: Leq(y, x),
                    ">": lambda: macros.lt(y, x)}[op]()
        return {"=": lambda: macros.tuple_eq(left, right),
                "!=": lambda: Not(macros.tuple_eq(left, right)),
                "<=": lambda: macros.tuple_leq(left, right),
                "<": lambda: macros.tuple_lt(left, right),
                ">=": lambda: macros.tuple_leq(right, left),
                ">": lambda: macros.tuple_lt(right, left)}[op]()

    def b_succ(self, scope: _Scope):
        self.expect("succ")
        self.expect("(")
        left = self.term(scope)
        self.expect(",")
        right = self.term(scope)
        self.expect(")")
        if ("min",) in (left, right) or ("max",) in (left, right) or len(left) != len(right):
            raise self.error("succ takes two variables or two tuples of equal length")
        for v in left + right:
            self.fo_use(v, scope)
        if len(left) == 1:
            return macros.succ(left[0], right[0], self.fresh)
        return macros.tuple_succ(left, right, self.fresh)

    def done(self):
        if self.pos != len(self.toks):
            raise self.error(f"unexpected trailing token {self.peek()!r}")


def parse_qformula(text: str, free_so: dict | None = None, sentence: bool = False):
    """Parse a quantitative formula.

    free_so declares arities of free relation variables.  With sentence=True
    every variable must be bound.
    """
    p = _Parser(text, free_so or {}, sentence)
    q = p.parse_q(_Scope())
    p.done()
    validate(q, {} if sentence else p.free_so)
    return q


def parse_bool(text: str, free_so: dict | None = None, sentence: bool = False):
    """Parse a boolean formula (without surrounding brackets)."""
    p = _Parser(text, free_so or {}, sentence)
    phi = p.parse_b(_Scope())
    p.done()
    validate(phi, {} if sentence else p.free_so)
    return phi
