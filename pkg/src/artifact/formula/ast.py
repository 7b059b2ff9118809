"""Abstract syntax for boolean (FO, SO, FO(LFP)) and quantitative formulae.

Nodes are frozen dataclasses, so equality is structural.  Derived data such
as free variables is cached on the node object itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union


class FormulaError(ValueError):
    """Raised for ill-formed formulae (arity mismatches, positivity, unbound names)."""


def _cached(node, key, compute):
    try:
        return node.__dict__[key]
    except KeyError:
        value = compute()
        object.__setattr__(node, key, value)
        return value


# ---------------------------------------------------------------- boolean layer

@dataclass(frozen=True)
class RelApp:
    """Atom R(x1..xk) for a structure relation R."""
    name: str
    args: tuple


@dataclass(frozen=True)
class SOApp:
    """Atom X(x1..xk) for a second-order (or lfp-bound) relation variable."""
    var: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Leq:
    left: str
    right: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Not:
    body: "BoolFormula"


@dataclass(frozen=True)
class And:
    left: "BoolFormula"
    right: "BoolFormula"


@dataclass(frozen=True)
class Or:
    left: "BoolFormula"
    right: "BoolFormula"


@dataclass(frozen=True)
class Implies:
    left: "BoolFormula"
    right: "BoolFormula"


@dataclass(frozen=True)
class Iff:
    left: "BoolFormula"
    right: "BoolFormula"


@dataclass(frozen=True)
class ForallFO:
    var: str
    body: "BoolFormula"


@dataclass(frozen=True)
class ExistsFO:
    var: str
    body: "BoolFormula"


@dataclass(frozen=True)
class ForallSO:
    var: str
    arity: int
    body: "BoolFormula"


@dataclass(frozen=True)
class ExistsSO:
    var: str
    arity: int
    body: "BoolFormula"


@dataclass(frozen=True)
class LfpRel:
    """[lfp_{P,params} body](args): the least fixed point of a positive operator."""
    rel: str
    params: tuple
    body: "BoolFormula"
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.params)


BoolFormula = Union[RelApp, SOApp, Eq, Leq, Top, Bottom, Not, And, Or, Implies, Iff,
                    ForallFO, ExistsFO, ForallSO, ExistsSO, LfpRel]
BOOL_TYPES = (RelApp, SOApp, Eq, Leq, Top, Bottom, Not, And, Or, Implies, Iff,
              ForallFO, ExistsFO, ForallSO, ExistsSO, LfpRel)
BINARY_CONNECTIVES = (And, Or, Implies, Iff)

TOP = Top()
BOTTOM = Bottom()


# ------------------------------------------------------------ quantitative layer

@dataclass(frozen=True)
class FOVar:
    name: str


@dataclass(frozen=True)
class SOVar:
    name: str


@dataclass(frozen=True)
class Bool:
    formula: BoolFormula


@dataclass(frozen=True)
class Add:
    left: "QFormula"
    right: "QFormula"


@dataclass(frozen=True)
class Mul:
    left: "QFormula"
    right: "QFormula"


@dataclass(frozen=True)
class SumFO:
    var: str
    body: "QFormula"


@dataclass(frozen=True)
class SumSO:
    var: str
    arity: int
    body: "QFormula"


@dataclass(frozen=True)
class FunAppFO:
    fun: str
    args: tuple


@dataclass(frozen=True)
class FunAppSO:
    fun: str
    arg: str


@dataclass(frozen=True)
class LfpFO:
    """[lfp_f body](args) where f takes first-order arguments bound to params."""
    fun: str
    params: tuple
    body: "QFormula"
    args: tuple

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class LfpSO:
    """[lfp_f body](arg) where f takes one relation of the given arity, bound to param."""
    fun: str
    param: str
    arity: int
    body: "QFormula"
    arg: str


QFormula = Union[FOVar, SOVar, Bool, Add, Mul, SumFO, SumSO, FunAppFO, FunAppSO, LfpFO, LfpSO]
Q_TYPES = (FOVar, SOVar, Bool, Add, Mul, SumFO, SumSO, FunAppFO, FunAppSO, LfpFO, LfpSO)
LFP_TYPES = (LfpFO, LfpSO)


# --------------------------------------------------------------------- helpers

def conj(*parts: BoolFormula) -> BoolFormula:
    parts = [p for p in parts if not isinstance(p, Top)]
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(*parts: BoolFormula) -> BoolFormula:
    parts = [p for p in parts if not isinstance(p, Bottom)]
    if not parts:
        return BOTTOM
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def forall(vars_, body: BoolFormula) -> BoolFormula:
    for v in reversed(tuple(vars_)):
        body = ForallFO(v, body)
    return body


def exists(vars_, body: BoolFormula) -> BoolFormula:
    for v in reversed(tuple(vars_)):
        body = ExistsFO(v, body)
    return body


def plus(*parts: QFormula) -> QFormula:
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out


def times(*parts: QFormula) -> QFormula:
    out = parts[0]
    for p in parts[1:]:
        out = Mul(out, p)
    return out


def flatten_add(q: QFormula) -> list:
    if isinstance(q, Add):
        return flatten_add(q.left) + flatten_add(q.right)
    return [q]


def flatten_mul(q: QFormula) -> list:
    if isinstance(q, Mul):
        return flatten_mul(q.left) + flatten_mul(q.right)
    return [q]


def flatten_and(phi: BoolFormula) -> list:
    if isinstance(phi, And):
        return flatten_and(phi.left) + flatten_and(phi.right)
    return [phi]


def children(node) -> tuple:
    if isinstance(node, (Not,)):
        return (node.body,)
    if isinstance(node, BINARY_CONNECTIVES + (Add, Mul)):
        return (node.left, node.right)
    if isinstance(node, (ForallFO, ExistsFO, ForallSO, ExistsSO, LfpRel, SumFO, SumSO, LfpFO, LfpSO)):
        return (node.body,)
    if isinstance(node, Bool):
        return (node.formula,)
    return ()


def walk(node):
    """Pre-order traversal over both layers."""
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(children(cur)))


# --------------------------------------------------------------- free variables

def free_fo(node) -> frozenset:
    """Free first-order variables."""
    return _cached(node, "_free_fo", lambda: _free_fo(node))


def _free_fo(node) -> frozenset:
    if isinstance(node, (RelApp, SOApp, FunAppFO)):
        return frozenset(node.args)
    if isinstance(node, (Eq, Leq)):
        return frozenset((node.left, node.right))
    if isinstance(node, FOVar):
        return frozenset((node.name,))
    if isinstance(node, (ForallFO, ExistsFO, SumFO)):
        return free_fo(node.body) - {node.var}
    if isinstance(node, LfpRel):
        return (free_fo(node.body) - set(node.params)) | frozenset(node.args)
    if isinstance(node, LfpFO):
        return (free_fo(node.body) - set(node.params)) | frozenset(node.args)
    out = frozenset()
    for c in children(node):
        out |= free_fo(c)
    return out


def free_so(node) -> frozenset:
    """Free second-order variables (including free lfp relation variables)."""
    return _cached(node, "_free_so", lambda: _free_so(node))


def _free_so(node) -> frozenset:
    if isinstance(node, SOApp):
        return frozenset((node.var,))
    if isinstance(node, SOVar):
        return frozenset((node.name,))
    if isinstance(node, FunAppSO):
        return frozenset((node.arg,))
    if isinstance(node, (ForallSO, ExistsSO, SumSO)):
        return free_so(node.body) - {node.var}
    if isinstance(node, LfpRel):
        return free_so(node.body) - {node.rel}
    if isinstance(node, LfpSO):
        return (free_so(node.body) - {node.param}) | {node.arg}
    out = frozenset()
    for c in children(node):
        out |= free_so(c)
    return out


def free_functions(node) -> frozenset:
    """Function symbols applied but not bound by an enclosing lfp."""
    return _cached(node, "_free_fun", lambda: _free_functions(node))


def _free_functions(node) -> frozenset:
    if isinstance(node, (FunAppFO, FunAppSO)):
        return frozenset((node.fun,))
    if isinstance(node, LFP_TYPES):
        return free_functions(node.body) - {node.fun}
    if isinstance(node, BOOL_TYPES):
        return frozenset()
    out = frozenset()
    for c in children(node):
        out |= free_functions(c)
    return out


def has_lfp(node) -> bool:
    return _cached(node, "_has_lfp", lambda: any(isinstance(x, LFP_TYPES) for x in walk(node)))


def has_so_quantifier(phi: BoolFormula) -> bool:
    return _cached(phi, "_has_soq", lambda: any(isinstance(x, (ForallSO, ExistsSO)) for x in walk(phi)))


def has_lfp_rel(phi: BoolFormula) -> bool:
    return _cached(phi, "_has_lfprel", lambda: any(isinstance(x, LfpRel) for x in walk(phi)))


def mentions(node, so_var: str) -> bool:
    return so_var in free_so(node)


def is_first_order(phi: BoolFormula) -> bool:
    """True for FO formulae (no SO quantifiers and no fixed points).

    Atoms over free relation variables are allowed, matching formulae
    like phi(X, Y) in the paper's grammars.
    """
    return not has_so_quantifier(phi) and not has_lfp_rel(phi)


# ---------------------------------------------------------------------- metrics

def formula_length(alpha: QFormula) -> int:
    """Recursive length: leaves count 1, + and * add 1, sums add 1.

    Boolean subformulae count 1 regardless of size.  Function applications
    count 1 and an lfp binder adds 1 to its body; the length bound on
    strings only applies to lfp-free formulae.
    """
    return _cached(alpha, "_length", lambda: _length(alpha))


def _length(alpha) -> int:
    if isinstance(alpha, (FOVar, SOVar, Bool, FunAppFO, FunAppSO)):
        return 1
    if isinstance(alpha, (Add, Mul)):
        return formula_length(alpha.left) + formula_length(alpha.right) + 1
    if isinstance(alpha, (SumFO, SumSO, LfpFO, LfpSO)):
        return formula_length(alpha.body) + 1
    raise FormulaError(f"not a quantitative formula: {alpha!r}")


# ------------------------------------------------------------------ positivity

def check_positive(phi: BoolFormula, rel: str) -> bool:
    """Syntactic positivity: every occurrence of rel is under an even number of negations.

    Implications count one negation on their left side; both sides of an
    equivalence count as mixed, so rel must not occur there.
    """
    def go(f, positive: bool) -> bool:
        if isinstance(f, SOApp):
            return positive or f.var != rel
        if isinstance(f, Not):
            return go(f.body, not positive)
        if isinstance(f, (And, Or)):
            return go(f.left, positive) and go(f.right, positive)
        if isinstance(f, Implies):
            return go(f.left, not positive) and go(f.right, positive)
        if isinstance(f, Iff):
            return rel not in free_so(f)
        if isinstance(f, (ForallFO, ExistsFO)):
            return go(f.body, positive)
        if isinstance(f, (ForallSO, ExistsSO)):
            return f.var == rel or go(f.body, positive)
        if isinstance(f, LfpRel):
            return f.rel == rel or go(f.body, positive)
        return True
    return go(phi, True)


def validate(node, so_arities: dict | None = None, fun_sigs: dict | None = None) -> None:
    """Check arity consistency, lfp positivity and function signatures.

    so_arities gives arities of free relation variables; fun_sigs maps free
    function symbols to ("fo", k) or ("so", k).
    """
    so_arities = dict(so_arities or {})
    fun_sigs = dict(fun_sigs or {})

    def go(f, so, funs):
        if isinstance(f, SOApp):
            if f.var in so and len(f.args) != so[f.var]:
                raise FormulaError(f"{f.var} has arity {so[f.var]} but is applied to {len(f.args)} arguments")
        elif isinstance(f, (ForallSO, ExistsSO, SumSO)):
            if f.arity < 1:
                raise FormulaError(f"relation variable {f.var} needs positive arity")
            go(f.body, {**so, f.var: f.arity}, funs)
        elif isinstance(f, LfpRel):
            if len(set(f.params)) != len(f.params):
                raise FormulaError(f"lfp parameters of {f.rel} must be distinct")
            if len(f.args) != len(f.params):
                raise FormulaError(f"lfp relation {f.rel} applied to wrong number of arguments")
            if not check_positive(f.body, f.rel):
                raise FormulaError(f"{f.rel} occurs negatively in its lfp body")
            go(f.body, {**so, f.rel: len(f.params)}, funs)
        elif isinstance(f, SOVar):
            pass
        elif isinstance(f, FunAppFO):
            sig = funs.get(f.fun)
            if sig is None:
                raise FormulaError(f"unknown function symbol {f.fun}")
            if sig != ("fo", len(f.args)):
                raise FormulaError(f"function {f.fun} applied with wrong signature")
        elif isinstance(f, FunAppSO):
            sig = funs.get(f.fun)
            if sig is None:
                raise FormulaError(f"unknown function symbol {f.fun}")
            if sig[0] != "so" or (f.arg in so and so[f.arg] != sig[1]):
                raise FormulaError(f"function {f.fun} applied with wrong signature")
        elif isinstance(f, LfpFO):
            if len(set(f.params)) != len(f.params) or len(f.args) != len(f.params):
                raise FormulaError(f"malformed lfp for {f.fun}")
            go(f.body, so, {**funs, f.fun: ("fo", len(f.params))})
        elif isinstance(f, LfpSO):
            if f.arg in so and so[f.arg] != f.arity:
                raise FormulaError(f"lfp argument {f.arg} has arity {so[f.arg]}, expected {f.arity}")
            body_so = free_so(f.body) - {f.param}
            extra = {v for v in body_so if v not in so}
            if extra:
                raise FormulaError(f"lfp body for {f.fun} has free relation variables {sorted(extra)}")
            go(f.body, {**so, f.param: f.arity}, {**funs, f.fun: ("so", f.arity)})
        else:
            for c in children(f):
                go(c, so, funs)

    go(node, so_arities, fun_sigs)
