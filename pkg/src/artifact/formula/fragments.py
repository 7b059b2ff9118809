"""Fragment classification and the syntactic define/extend shapes.

Each fragment is checked by a small recursive matcher over the grammar that
defines it.  Matching is purely syntactic: a tagged formula always satisfies
the corresponding grammar, but semantically equivalent rewrites may be
classified as General.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

from .ast import (Add, And, Bool, BOTTOM, ExistsFO, FOVar, ForallFO, FormulaError, FunAppFO,
                  FunAppSO, Iff, LfpFO, LfpSO, Mul, Not, Or, SOApp, SOVar, SumFO, SumSO, Top,
                  flatten_add, flatten_and, flatten_mul, free_so, has_lfp, has_lfp_rel,
                  has_so_quantifier, is_first_order, plus, times)

MAX_NORMAL_FORM_TERMS = 64


class FragmentTag(str, enum.Enum):
    SigmaSO_FO_xfree = "SigmaSO_FO_xfree"
    SigmaSO_SO_xfree = "SigmaSO_SO_xfree"
    RfoSfoFO = "RfoSfoFO"
    RsoSsoSO = "RsoSsoSO"
    RsoR_SsoSO = "RsoR_SsoSO"
    RsoR_SsoR_LFP = "RsoR_SsoR_LFP"
    RsoR_SsoR_FO = "RsoR_SsoR_FO"
    General = "General"

    def __str__(self) -> str:
        return self.value


TOTP_TAGS = (FragmentTag.RsoR_SsoR_FO, FragmentTag.RsoR_SsoR_LFP)


# ------------------------------------------------------------ define / extend

def _strip_forall(phi):
    vars_ = []
    while isinstance(phi, ForallFO):
        vars_.append(phi.var)
        phi = phi.body
    return tuple(vars_), phi


def _iff_sides(matrix, ys):
    """Split an equivalence into (Y, other side) when one side is Y(ys)."""
    if not isinstance(matrix, Iff):
        return None
    for atom, other in ((matrix.left, matrix.right), (matrix.right, matrix.left)):
        if isinstance(atom, SOApp) and atom.args == ys and atom.var not in free_so(other):
            return atom.var, other
    return None


def _extend_body(other, ys, y_var):
    """Match X(ys) or X(ys) | psi, returning (X, psi)."""
    if isinstance(other, SOApp) and other.args == ys and other.var != y_var:
        return other.var, BOTTOM
    if isinstance(other, Or) and isinstance(other.left, SOApp) and other.left.args == ys \
            and other.left.var != y_var:
        return other.left.var, other.right
    return None


def recognize_define(phi):
    """Match forall ys (Y(ys) <-> chi) with Y not free in chi.

    Returns (Y, ys, chi), or None.  Formulae of extend shape are left to
    recognize_extend.
    """
    ys, matrix = _strip_forall(phi)
    if not ys or len(set(ys)) != len(ys):
        return None
    split = _iff_sides(matrix, ys)
    if split is None:
        return None
    y_var, chi = split
    if _extend_body(chi, ys, y_var) is not None:
        return None
    return y_var, ys, chi


@dataclass(frozen=True)
class ExtendShape:
    source: str      # X
    target: str      # Y
    params: tuple    # the universally bound variables
    psi: object      # the added part
    strict: bool


def _strictness_witness(phi, x_var, y_var) -> bool:
    """Match exists zs (!X(zs) & Y(zs))."""
    zs = []
    while isinstance(phi, ExistsFO):
        zs.append(phi.var)
        phi = phi.body
    zs = tuple(zs)
    if not zs or not isinstance(phi, And):
        return False
    left, right = phi.left, phi.right
    return (isinstance(left, Not) and isinstance(left.body, SOApp) and left.body.var == x_var
            and left.body.args == zs and isinstance(right, SOApp) and right.var == y_var
            and right.args == zs)


def recognize_extend(phi):
    """Match forall ys (Y(ys) <-> X(ys) | psi), optionally conjoined with the strictness witness."""
    candidates = [(phi, None)]
    if isinstance(phi, And):
        candidates = [(phi.left, phi.right), (phi.right, phi.left)]
    for base, witness in candidates:
        ys, matrix = _strip_forall(base)
        if not ys or len(set(ys)) != len(ys):
            continue
        split = _iff_sides(matrix, ys)
        if split is None:
            continue
        y_var, other = split
        body = _extend_body(other, ys, y_var)
        if body is None:
            continue
        x_var, psi = body
        if y_var in free_so(psi):
            continue
        if witness is None:
            return ExtendShape(x_var, y_var, ys, psi, False)
        if _strictness_witness(witness, x_var, y_var):
            return ExtendShape(x_var, y_var, ys, psi, True)
    return None


# ------------------------------------------------------------- side conditions

def _quant_nodes(q):
    """Quantitative nodes only (not descending into boolean leaves)."""
    stack = [q]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, (Add, Mul)):
            stack += [cur.left, cur.right]
        elif isinstance(cur, (SumFO, SumSO, LfpFO, LfpSO)):
            stack.append(cur.body)


def _bool_leaves(q):
    return [node.formula for node in _quant_nodes(q) if isinstance(node, Bool)]


def x_free(q) -> bool:
    return not any(isinstance(node, FOVar) for node in _quant_nodes(q))


def X_free(q) -> bool:
    return not any(isinstance(node, SOVar) for node in _quant_nodes(q))


def function_free(q) -> bool:
    return not any(isinstance(node, (FunAppFO, FunAppSO)) for node in _quant_nodes(q))


def _plain(q) -> bool:
    """lfp-free and function-free quantitative formula."""
    return not has_lfp(q) and function_free(q)


def _leaves_fo(q) -> bool:
    return all(is_first_order(phi) for phi in _bool_leaves(q))


def _leaves_so(q) -> bool:
    return all(not has_lfp_rel(phi) for phi in _bool_leaves(q))


def _leaves_lfp(q) -> bool:
    return all(not has_so_quantifier(phi) for phi in _bool_leaves(q))


def _alpha_fo_Xfree(q) -> bool:
    """An X-free SigmaFO(FO) formula: no relation variables anywhere."""
    return (_plain(q) and X_free(q) and _leaves_fo(q)
            and not any(isinstance(node, SumSO) for node in _quant_nodes(q))
            and all(not free_so(phi) for phi in _bool_leaves(q)))


def _alpha_so_xfree(q) -> bool:
    return _plain(q) and x_free(q) and _leaves_so(q)


def _alpha_so_Xfree(q) -> bool:
    return _plain(q) and X_free(q) and _leaves_so(q)


def _alpha_restricted(q, leaf_ok) -> bool:
    """SigmaSO^r: X | phi | + | * | sum y | Y := phi * alpha with phi defining Y."""
    if isinstance(q, SOVar):
        return True
    if isinstance(q, Bool):
        return leaf_ok(q.formula)
    if isinstance(q, (Add, Mul)):
        return _alpha_restricted(q.left, leaf_ok) and _alpha_restricted(q.right, leaf_ok)
    if isinstance(q, SumFO):
        return _alpha_restricted(q.body, leaf_ok)
    if isinstance(q, SumSO):
        factors = flatten_mul(q.body)
        head = factors[0]
        if not isinstance(head, Bool) or not leaf_ok(head.formula):
            return False
        shape = recognize_define(head.formula)
        if shape is None or shape[0] != q.var or len(shape[1]) != q.arity:
            return False
        return all(_alpha_restricted(f, leaf_ok) for f in factors[1:])
    return False


def _leaf_fo(phi) -> bool:
    return is_first_order(phi)


def _leaf_lfp(phi) -> bool:
    return not has_so_quantifier(phi)


# ------------------------------------------------------------ recursion shapes

def _beta_fo(q, f) -> bool:
    """beta ::= alpha | f(x) | beta + beta | alpha * beta | sum y. beta."""
    if function_free(q):
        return _alpha_fo_Xfree(q)
    if isinstance(q, FunAppFO):
        return q.fun == f
    if isinstance(q, Add):
        return _beta_fo(q.left, f) and _beta_fo(q.right, f)
    if isinstance(q, Mul):
        factors = flatten_mul(q)
        return all(_alpha_fo_Xfree(a) for a in factors[:-1]) and _beta_fo(factors[-1], f)
    if isinstance(q, SumFO):
        return _beta_fo(q.body, f)
    return False


def _beta_so(q, f) -> bool:
    """The second-order analogue, also allowing Sum Y. beta."""
    if function_free(q):
        return _alpha_so_Xfree(q)
    if isinstance(q, FunAppSO):
        return q.fun == f
    if isinstance(q, Add):
        return _beta_so(q.left, f) and _beta_so(q.right, f)
    if isinstance(q, Mul):
        factors = flatten_mul(q)
        return all(_alpha_so_Xfree(a) for a in factors[:-1]) and _beta_so(factors[-1], f)
    if isinstance(q, (SumFO, SumSO)):
        return _beta_so(q.body, f)
    return False


@dataclass(frozen=True)
class ConnectionShape:
    """beta = alpha + Sum Y. phi(X, _Y_) * f(Y), the restricted second-order recursion."""
    alpha: object          # None when no base summand is present
    var: str               # Y
    arity: int
    phi: object            # phi(X, Y)


def match_connection_shape(lfp: LfpSO):
    """Split an lfp body into base summand and connection formula, or None."""
    if not isinstance(lfp, LfpSO):
        return None
    alphas, rec = [], []
    for s in flatten_add(lfp.body):
        (alphas if function_free(s) else rec).append(s)
    if len(rec) > 1:
        return None
    if not all(_alpha_so_xfree(a) for a in alphas):
        return None
    alpha = plus(*alphas) if alphas else None
    if not rec:
        return ConnectionShape(alpha, None, lfp.arity, None)
    s = rec[0]
    if not isinstance(s, SumSO) or s.arity != lfp.arity:
        return None
    factors = flatten_mul(s.body)
    if len(factors) != 3 or factors[2] != FunAppSO(lfp.fun, s.var):
        return None
    first, second = factors[0], factors[1]
    if isinstance(first, SOVar) and isinstance(second, Bool):
        term, cond = first, second
    elif isinstance(first, Bool) and isinstance(second, SOVar):
        term, cond = second, first
    else:
        return None
    if term.name != s.var or has_lfp_rel(cond.formula):
        return None
    if not free_so(cond.formula) <= {lfp.param, s.var}:
        return None
    return ConnectionShape(alpha, s.var, s.arity, cond.formula)


def _underline_extend(q, f, x_var, leaf_ok):
    """Match Sum Y. psi * $Y * f(Y) with psi strictly extending X to Y; return (Y, psi)."""
    if not isinstance(q, SumSO):
        return None
    factors = flatten_mul(q.body)
    if len(factors) != 3 or factors[2] != FunAppSO(f, q.var):
        return None
    bools = [x for x in factors[:2] if isinstance(x, Bool)]
    terms = [x for x in factors[:2] if isinstance(x, SOVar)]
    if len(bools) != 1 or len(terms) != 1 or terms[0].name != q.var:
        return None
    psi = bools[0].formula
    if not leaf_ok(psi):
        return None
    shape = recognize_extend(psi)
    if shape is None or not shape.strict or shape.source != x_var or shape.target != q.var \
            or len(shape.params) != q.arity:
        return None
    return q.var, psi


@dataclass
class NormalForm:
    """alpha + sum_i [guard_i] * (Sum Y. psi_i * $Y * f(Y))."""
    alpha: list          # summands of the base formula
    terms: list          # list of (guard conjuncts: tuple of BoolFormula, SumSO node)

    def to_formula(self):
        alpha = plus(*self.alpha) if self.alpha else Bool(BOTTOM)
        parts = [alpha]
        for guard, term in self.terms:
            g = guard[0] if guard else Top()
            for c in guard[1:]:
                g = And(g, c)
            parts.append(Mul(Bool(g), term))
        return plus(*parts)


def _conjuncts(phi) -> tuple:
    return tuple(c for c in flatten_and(phi) if not isinstance(c, Top))


def _normalize(q, f, x_var, leaf_ok):
    """Return (alpha summands, [(guard conjuncts, term)]) or raise FormulaError."""
    if function_free(q):
        if not _alpha_restricted(q, leaf_ok):
            raise FormulaError("base summand is not a restricted SigmaSO formula")
        return [q], []
    if isinstance(q, SumSO):
        if _underline_extend(q, f, x_var, leaf_ok) is None:
            raise FormulaError("recursive summand is not of the form Y := psi(X) * f(Y) with strict extension")
        return [], [((), q)]
    if isinstance(q, Add):
        alphas, terms = [], []
        for s in flatten_add(q):
            a, t = _normalize(s, f, x_var, leaf_ok)
            alphas += a
            terms += t
        return alphas, terms
    if isinstance(q, Mul):
        factors = flatten_mul(q)
        guards = []
        for g in factors[:-1]:
            if not isinstance(g, Bool) or not leaf_ok(g.formula):
                raise FormulaError("only boolean guards may precede a recursive factor")
            guards += _conjuncts(g.formula)
        a, t = _normalize(factors[-1], f, x_var, leaf_ok)
        guard_bools = [Bool(g) for g in guards]
        alphas = [times(*guard_bools, s) if guard_bools else s for s in a]
        return alphas, [(tuple(guards) + gs, term) for gs, term in t]
    raise FormulaError(f"unexpected node {type(q).__name__} in recursion body")


def _exclusive(g1: tuple, g2: tuple, alpha: list) -> bool:
    """Certify that if both guards hold then alpha yields the empty string."""
    for c in g1:
        if Not(c) in g2 or (isinstance(c, Not) and c.body in g2):
            return True
    both = set(g1) | set(g2)
    for s in alpha:
        factors = flatten_mul(s)
        if all(isinstance(x, Bool) for x in factors):
            needed = {c for x in factors for c in _conjuncts(x.formula)}
            if needed <= both:
                return True
    return False


def normalize_totp_fo(lfp_or_body, fun: str | None = None, param: str | None = None) -> NormalForm:
    """Rewrite a first-order TotP recursion body into alpha + sum_i guard_i * Y := psi_i * f(Y).

    Accepts an LfpSO node or a bare body (then fun and param are required).
    Raises FormulaError when the body is outside the grammar or when two
    guards can hold together without the base summand producing epsilon.
    """
    if isinstance(lfp_or_body, LfpSO):
        body, fun, param = lfp_or_body.body, lfp_or_body.fun, lfp_or_body.param
    else:
        body = lfp_or_body
        if fun is None or param is None:
            raise FormulaError("function symbol and parameter needed for a bare body")
    alphas, terms = _normalize(body, fun, param, _leaf_fo)
    if len(terms) > MAX_NORMAL_FORM_TERMS:
        raise FormulaError(f"normal form has {len(terms)} terms, more than {MAX_NORMAL_FORM_TERMS}")
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            if not _exclusive(terms[i][0], terms[j][0], alphas):
                raise FormulaError("two recursion guards may hold together without an epsilon base case")
    return NormalForm(alphas, terms)


def _is_totp_fo(lfp: LfpSO) -> bool:
    try:
        normalize_totp_fo(lfp)
    except FormulaError:
        return False
    return True


def _lfp_group(s, f, x_var):
    """Match one recursion summand of the fixed-point TotP fragment.

    Accepts phi(_X_) * (true + sum_i Sum Y. psi_i * f(Y)) and the per-branch
    form Sum Y. phi(_X_) * (true + psi * f(Y)).  Returns (phi, [psi_i]) or None.
    """
    factors = flatten_mul(s)
    if isinstance(s, SumSO):
        factors = flatten_mul(s.body)
        if len(factors) != 3:
            return None
        head = _underline_guard(factors[:2], x_var)
        tail = flatten_add(factors[2])
        if head is None or len(tail) != 2 or not _is_top(tail[0]):
            return None
        branch = flatten_mul(tail[1])
        if len(branch) != 2 or not isinstance(branch[0], Bool) or branch[1] != FunAppSO(f, s.var):
            return None
        if s.var in free_so(head):
            return None
        psi = _strict_psi(branch[0].formula, x_var, s.var, s.arity)
        return None if psi is None else (head, [psi])
    if len(factors) != 3:
        return None
    head = _underline_guard(factors[:2], x_var)
    if head is None:
        return None
    tail = flatten_add(factors[2])
    if not tail or not _is_top(tail[0]) or len(tail) < 2:
        return None
    psis = []
    for t in tail[1:]:
        if not isinstance(t, SumSO):
            return None
        branch = flatten_mul(t.body)
        if len(branch) != 2 or not isinstance(branch[0], Bool) or branch[1] != FunAppSO(f, t.var):
            return None
        psi = _strict_psi(branch[0].formula, x_var, t.var, t.arity)
        if psi is None:
            return None
        psis.append(psi)
    return head, psis


def _is_top(q) -> bool:
    return isinstance(q, Bool) and isinstance(q.formula, Top)


def _underline_guard(pair, x_var):
    bools = [x for x in pair if isinstance(x, Bool)]
    terms = [x for x in pair if isinstance(x, SOVar)]
    if len(bools) != 1 or len(terms) != 1 or terms[0].name != x_var:
        return None
    phi = bools[0].formula
    return phi if _leaf_lfp(phi) else None


def _strict_psi(psi, x_var, y_var, arity):
    if not _leaf_lfp(psi):
        return None
    shape = recognize_extend(psi)
    if shape is None or not shape.strict or shape.source != x_var or shape.target != y_var \
            or len(shape.params) != arity:
        return None
    return psi


def _is_totp_lfp(lfp: LfpSO) -> bool:
    alphas, guards = [], []
    for s in flatten_add(lfp.body):
        if function_free(s):
            alphas.append(s)
            continue
        group = _lfp_group(s, lfp.fun, lfp.param)
        if group is None:
            return False
        guards.append(group[0])
    if any(g != guards[0] for g in guards):
        return False
    return all(_alpha_restricted(a, _leaf_lfp) for a in alphas)


# ---------------------------------------------------------------- classifier

def classify_fragment(phi) -> FragmentTag:
    """Most specific fragment tag for a quantitative formula."""
    if isinstance(phi, LfpFO):
        return FragmentTag.RfoSfoFO if _beta_fo(phi.body, phi.fun) else FragmentTag.General
    if isinstance(phi, LfpSO):
        if _is_totp_fo(phi):
            return FragmentTag.RsoR_SsoR_FO
        if _is_totp_lfp(phi):
            return FragmentTag.RsoR_SsoR_LFP
        if match_connection_shape(phi) is not None:
            return FragmentTag.RsoR_SsoSO
        if _beta_so(phi.body, phi.fun):
            return FragmentTag.RsoSsoSO
        return FragmentTag.General
    if _plain(phi) and x_free(phi):
        if _leaves_fo(phi):
            return FragmentTag.SigmaSO_FO_xfree
        if _leaves_so(phi):
            return FragmentTag.SigmaSO_SO_xfree
    return FragmentTag.General


def lfp_nodes(q) -> list:
    """All lfp binders in a formula, outermost first."""
    return [node for node in _quant_nodes(q) if isinstance(node, (LfpFO, LfpSO))]
