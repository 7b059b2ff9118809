"""Render ASTs in the surface syntax accepted by the parser.

Macros are never re-introduced, so parse(to_text(node)) == node.
"""
from __future__ import annotations

from .ast import (Add, And, Bool, Bottom, Eq, ExistsFO, ExistsSO, FOVar, ForallFO, ForallSO,
                  FunAppFO, FunAppSO, Iff, Implies, Leq, LfpFO, LfpRel, LfpSO, Mul, Not, Or,
                  RelApp, SOApp, SOVar, SumFO, SumSO, Top)

# Boolean precedence: larger binds tighter.
_IFF, _IMP, _OR, _AND, _UNARY = 1, 2, 3, 4, 5


def bool_text(phi, prec: int = 0) -> str:
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, (RelApp, SOApp)):
        name = phi.name if isinstance(phi, RelApp) else phi.var
        return f"{name}({', '.join(phi.args)})"
    if isinstance(phi, Eq):
        s = f"{phi.left} = {phi.right}"
        return f"({s})" if prec >= _UNARY else s
    if isinstance(phi, Leq):
        s = f"{phi.left} <= {phi.right}"
        return f"({s})" if prec >= _UNARY else s
    if isinstance(phi, Not):
        return "!" + bool_text(phi.body, _UNARY)
    if isinstance(phi, And):
        s = f"{bool_text(phi.left, _AND)} & {bool_text(phi.right, _AND + 1)}"
        return f"({s})" if prec > _AND else s
    if isinstance(phi, Or):
        s = f"{bool_text(phi.left, _OR)} | {bool_text(phi.right, _OR + 1)}"
        return f"({s})" if prec > _OR else s
    if isinstance(phi, Implies):
        s = f"{bool_text(phi.left, _IMP + 1)} -> {bool_text(phi.right, _IMP)}"
        return f"({s})" if prec > _IMP else s
    if isinstance(phi, Iff):
        s = f"{bool_text(phi.left, _IFF)} <-> {bool_text(phi.right, _IFF + 1)}"
        return f"({s})" if prec > _IFF else s
    if isinstance(phi, (ForallFO, ExistsFO)):
        word = "forall" if isinstance(phi, ForallFO) else "exists"
        s = f"{word} {phi.var}. {bool_text(phi.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(phi, (ForallSO, ExistsSO)):
        word = "ForallR" if isinstance(phi, ForallSO) else "ExistsR"
        s = f"{word} {phi.var}:{phi.arity}. {bool_text(phi.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(phi, LfpRel):
        return (f"lfpR {phi.rel}({', '.join(phi.params)}) = {bool_text(phi.body)} "
                f"in {phi.rel}({', '.join(phi.args)})")
    raise TypeError(f"not a boolean formula: {phi!r}")


_ADD, _MUL = 1, 2


def to_text(q, prec: int = 0) -> str:
    """Surface syntax for a quantitative (or boolean) formula."""
    if isinstance(q, FOVar):
        return q.name
    if isinstance(q, SOVar):
        return f"${q.name}"
    if isinstance(q, Bool):
        return f"[{bool_text(q.formula)}]"
    if isinstance(q, Add):
        s = f"{to_text(q.left, _ADD)} + {to_text(q.right, _ADD + 1)}"
        return f"({s})" if prec > _ADD else s
    if isinstance(q, Mul):
        s = f"{to_text(q.left, _MUL)} * {to_text(q.right, _MUL + 1)}"
        return f"({s})" if prec > _MUL else s
    if isinstance(q, SumFO):
        s = f"sum {q.var}. {to_text(q.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(q, SumSO):
        s = f"Sum {q.var}:{q.arity}. {to_text(q.body)}"
        return f"({s})" if prec > 0 else s
    if isinstance(q, FunAppFO):
        return f"{q.fun}({', '.join(q.args)})"
    if isinstance(q, FunAppSO):
        return f"{q.fun}({q.arg})"
    if isinstance(q, LfpFO):
        return f"lfp {q.fun}({', '.join(q.params)}) = {to_text(q.body)} in {q.fun}({', '.join(q.args)})"
    if isinstance(q, LfpSO):
        return f"lfp {q.fun}({q.param}:{q.arity}) = {to_text(q.body)} in {q.fun}({q.arg})"
    return bool_text(q, prec)
