"""Model checking for FO, SO and FO(LFP) over finite ordered structures.

Formulae are evaluated set-at-a-time: a subformula with free first-order
variables v1 < ... < vm (sorted by name) denotes a boolean array of shape
(n,) * m whose entry at (a1..am) is its truth value under vi -> ai.
Connectives are broadcast operations and quantifiers are reductions.
Second-order quantifiers enumerate relations; fixed points iterate stages.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .formula.ast import (And, Bottom, Eq, ExistsFO, ExistsSO, ForallFO, ForallSO, FormulaError,
                          Iff, Implies, Leq, LfpRel, Not, Or, RelApp, SOApp, Top, check_positive,
                          free_fo, free_so)
from .formula.fragments import recognize_define, recognize_extend
from .structure import RelationValue, Structure, check_guard, enumerate_relations


class UnboundVariable(FormulaError):
    pass


@dataclass(frozen=True)
class Assignment:
    """First-order assignment v and second-order assignment V."""

    fo: dict = field(default_factory=dict)
    so: dict = field(default_factory=dict)

    def bind_fo(self, var: str, value: int) -> "Assignment":
        return Assignment({**self.fo, var: value}, self.so)

    def bind_so(self, var: str, value: RelationValue) -> "Assignment":
        return Assignment(self.fo, {**self.so, var: value})

    def bind_fos(self, vars_, values) -> "Assignment":
        return Assignment({**self.fo, **dict(zip(vars_, values))}, self.so)


EMPTY_ASSIGNMENT = Assignment()


class BoolEvaluator:
    """Evaluates boolean formulae over one structure, caching static results.

    Subformulae without free relation variables are cached for the lifetime
    of the evaluator; fixed points are cached per binding of the relation
    variables they depend on.
    """

    def __init__(self, structure: Structure):
        self.A = structure
        self.n = structure.n
        self._dense: dict = {}
        self._static: dict = {}
        self._roots: dict = {}
        self._fixpoints: dict = {}
        self._positive: dict = {}
        self.stage_log: list = []    # (lfp relation, number of stages) per fixpoint computed
        grid = np.arange(self.n)
        self._le = grid[:, None] <= grid[None, :]
        self._eye = np.eye(self.n, dtype=bool)
        self._rel_arrays = {name: self.dense(rel) for name, rel in structure.relations.items()}

    # ------------------------------------------------------------- conversions
    def dense(self, rel: RelationValue) -> np.ndarray:
        arr = self._dense.get(rel)
        if arr is None:
            arr = np.zeros((self.n,) * rel.arity, dtype=bool)
            if rel.tuples:
                idx = np.array(sorted(rel.tuples)).T
                if idx.max() >= self.n:
                    raise FormulaError(f"relation {rel} does not fit a universe of size {self.n}")
                arr[tuple(idx)] = True
            arr.setflags(write=False)
            self._dense[rel] = arr
        return arr

    def to_relation(self, arr: np.ndarray) -> RelationValue:
        return RelationValue(arr.ndim, frozenset(tuple(int(i) for i in t) for t in np.argwhere(arr)))

    def env_of(self, asg: Assignment) -> dict:
        return {name: (rel, self.dense(rel)) for name, rel in asg.so.items()}

    # ------------------------------------------------------------ tensor algebra
    def _align(self, vars_, arr, target):
        shape = [self.n if v in vars_ else 1 for v in target]
        return arr.reshape(shape)

    def _combine(self, op, t1, t2):
        (v1, a1), (v2, a2) = t1, t2
        if v1 == v2:
            return v1, op(a1, a2)
        target = tuple(sorted(set(v1) | set(v2)))
        return target, op(self._align(v1, a1, target), self._align(v2, a2, target))

    def _index(self, arr, args):
        """Result tensor of atom R(args) given the dense array of R."""
        if arr.ndim != len(args):
            raise FormulaError(f"arity mismatch: relation of arity {arr.ndim} applied to {len(args)} arguments")
        vars_ = tuple(sorted(set(args)))
        if vars_ == tuple(args):
            return vars_, arr
        if len(vars_) == len(args):
            return vars_, arr.transpose([args.index(v) for v in vars_])
        grids = []
        for a in args:
            shape = [1] * len(vars_)
            shape[vars_.index(a)] = self.n
            grids.append(np.arange(self.n).reshape(shape))
        return vars_, arr[tuple(grids)]

    def _full(self, vars_, arr, target):
        """Broadcast a tensor to every variable of target and return it in target order."""
        order = tuple(sorted(target))
        full = np.broadcast_to(self._align(vars_, arr, order), (self.n,) * len(order))
        return full.transpose([order.index(v) for v in target])

    # -------------------------------------------------------------- evaluation
    def tensor(self, phi, env: dict):
        """Return (sorted free variables, boolean array) for phi under env.

        env maps relation variables to (key, dense array); key None marks a
        fixed-point stage that must not be cached.
        """
        if not free_so(phi):
            key = id(phi)
            hit = self._static.get(key)
            if hit is None:
                hit = (phi, self._tensor(phi, env))
                self._static[key] = hit
            return hit[1]
        return self._tensor(phi, env)

    def _env_key(self, names, env):
        parts = []
        for name in sorted(names):
            if name not in env:
                raise UnboundVariable(f"unbound relation variable {name}")
            key = env[name][0]
            if key is None:
                return None
            parts.append((name, key))
        return tuple(parts)

    def root_tensor(self, phi, env: dict):
        """tensor() with caching keyed on the relation-variable bindings."""
        names = free_so(phi)
        if not names:
            return self.tensor(phi, env)
        ek = self._env_key(names, env)
        if ek is None:
            return self._tensor(phi, env)
        key = (id(phi), ek)
        hit = self._roots.get(key)
        if hit is None:
            hit = (phi, self._tensor(phi, env))
            self._roots[key] = hit
        return hit[1]

    def _tensor(self, phi, env):
        if isinstance(phi, Top):
            return (), np.bool_(True)
        if isinstance(phi, Bottom):
            return (), np.bool_(False)
        if isinstance(phi, RelApp):
            arr = self._rel_arrays.get(phi.name)
            if arr is None:
                raise FormulaError(f"unknown relation {phi.name}")
            return self._index(arr, phi.args)
        if isinstance(phi, SOApp):
            if phi.var not in env:
                raise UnboundVariable(f"unbound relation variable {phi.var}")
            return self._index(env[phi.var][1], phi.args)
        if isinstance(phi, Eq):
            if phi.left == phi.right:
                return (phi.left,), np.ones(self.n, dtype=bool)
            return tuple(sorted((phi.left, phi.right))), self._eye
        if isinstance(phi, Leq):
            if phi.left == phi.right:
                return (phi.left,), np.ones(self.n, dtype=bool)
            if phi.left < phi.right:
                return (phi.left, phi.right), self._le
            return (phi.right, phi.left), self._le.T
        if isinstance(phi, Not):
            vars_, arr = self.tensor(phi.body, env)
            return vars_, ~arr
        if isinstance(phi, And):
            return self._combine(np.logical_and, self.tensor(phi.left, env), self.tensor(phi.right, env))
        if isinstance(phi, Or):
            return self._combine(np.logical_or, self.tensor(phi.left, env), self.tensor(phi.right, env))
        if isinstance(phi, Implies):
            return self._combine(lambda a, b: ~a | b, self.tensor(phi.left, env), self.tensor(phi.right, env))
        if isinstance(phi, Iff):
            return self._combine(np.equal, self.tensor(phi.left, env), self.tensor(phi.right, env))
        if isinstance(phi, (ForallFO, ExistsFO)):
            vars_, arr = self.tensor(phi.body, env)
            if phi.var not in vars_:
                return vars_, arr
            axis = vars_.index(phi.var)
            reduced = arr.all(axis=axis) if isinstance(phi, ForallFO) else arr.any(axis=axis)
            return vars_[:axis] + vars_[axis + 1:], reduced
        if isinstance(phi, (ForallSO, ExistsSO)):
            return self._so_quantifier(phi, env)
        if isinstance(phi, LfpRel):
            fix = self.fixpoint(phi, env)
            return self._index(fix, phi.args)
        raise FormulaError(f"not a boolean formula: {phi!r}")

    def _so_quantifier(self, phi, env):
        if phi.var not in free_so(phi.body):
            return self.tensor(phi.body, env)
        universal = isinstance(phi, ForallSO)
        result = None
        vars_ = tuple(sorted(free_fo(phi.body)))
        for rel in enumerate_relations(self.n, phi.arity):
            t = self.tensor(phi.body, {**env, phi.var: (rel, self.dense(rel))})
            arr = np.broadcast_to(self._align(t[0], t[1], vars_), (self.n,) * len(vars_))
            if result is None:
                result = arr.copy()
            elif universal:
                result &= arr
            else:
                result |= arr
            if vars_ == () and bool(result) != universal:
                break
        return vars_, result

    def fixpoint(self, lfp: LfpRel, env: dict) -> np.ndarray:
        """Dense array of the least fixed point, computed by stage iteration from the empty relation."""
        ok = self._positive.get(id(lfp))
        if ok is None:
            ok = check_positive(lfp.body, lfp.rel)
            self._positive[id(lfp)] = ok
        if not ok:
            raise FormulaError(f"{lfp.rel} occurs negatively in its lfp body")
        extra = free_fo(lfp.body) - set(lfp.params)
        if extra:
            raise FormulaError(f"lfp body of {lfp.rel} has first-order parameters {sorted(extra)}; "
                               "only the bound variables may be free")
        deps = free_so(lfp.body) - {lfp.rel}
        ek = self._env_key(deps, env)
        key = (id(lfp.body), lfp.rel, lfp.params, ek)
        if ek is not None and key in self._fixpoints:
            return self._fixpoints[key][1]
        k = len(lfp.params)
        stage = np.zeros((self.n,) * k, dtype=bool)
        bound = self.n ** k + 1
        stages = 0
        while True:
            vars_, arr = self.tensor(lfp.body, {**env, lfp.rel: (None, stage)})
            nxt = np.array(self._full(vars_, arr, lfp.params))
            if not (stage <= nxt).all():
                raise AssertionError("fixed-point stages are not increasing")
            if (nxt == stage).all():
                break
            stage = nxt
            stages += 1
            if stages > bound:
                raise AssertionError(f"fixed point of {lfp.rel} did not stabilize within {bound} stages")
        stage.setflags(write=False)
        self.stage_log.append((lfp.rel, stages))
        if ek is not None:
            self._fixpoints[key] = (lfp, stage)
        return stage

    # ------------------------------------------------------------------ queries
    def holds(self, phi, asg: Assignment, env: dict | None = None) -> bool:
        vars_, arr = self.root_tensor(phi, self.env_of(asg) if env is None else env)
        try:
            point = tuple(asg.fo[v] for v in vars_)
        except KeyError as exc:
            raise UnboundVariable(f"unbound variable {exc.args[0]}") from None
        return bool(arr[point]) if point else bool(arr)

    def relation_of(self, phi, params: tuple, asg: Assignment, env: dict | None = None) -> RelationValue:
        """{a : phi holds with params -> a}, other free variables taken from asg."""
        vars_, arr = self.root_tensor(phi, self.env_of(asg) if env is None else env)
        fixed = [v for v in vars_ if v not in params]
        if fixed:
            try:
                idx = tuple(asg.fo[v] if v in fixed else slice(None) for v in vars_)
            except KeyError as exc:
                raise UnboundVariable(f"unbound variable {exc.args[0]}") from None
            arr = arr[idx]
            vars_ = tuple(v for v in vars_ if v not in fixed)
        return self.to_relation(np.asarray(self._full(vars_, arr, params)))

    def unique_define(self, phi, asg: Assignment, env: dict | None = None):
        shape = recognize_define(phi)
        if shape is None:
            raise FormulaError("formula does not syntactically define a relation")
        y_var, ys, chi = shape
        candidate = self.relation_of(chi, ys, asg, env)
        check = asg.bind_so(y_var, candidate)
        return candidate if self.holds(phi, check) else None

    def unique_extend(self, phi, asg: Assignment, env: dict | None = None):
        shape = recognize_extend(phi)
        if shape is None:
            raise FormulaError("formula does not syntactically extend a relation")
        if shape.source not in asg.so:
            raise UnboundVariable(f"unbound relation variable {shape.source}")
        base = asg.so[shape.source]
        added = self.relation_of(shape.psi, shape.params, asg, env)
        candidate = base.union(added.tuples)
        if shape.strict and candidate == base:
            return None
        return candidate if self.holds(phi, asg.bind_so(shape.target, candidate)) else None


def eval_bool(phi, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT) -> bool:
    """Truth of phi in A under asg."""
    for name, rel in asg.so.items():
        for t in rel.tuples:
            if any(not 0 <= a < A.n for a in t):
                raise FormulaError(f"relation bound to {name} does not fit the universe")
    return BoolEvaluator(A).holds(phi, asg)


def unique_define(phi, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT):
    """The unique relation defined by phi, or None if phi has no solution."""
    return BoolEvaluator(A).unique_define(phi, asg)


def unique_extend(phi, A: Structure, asg: Assignment):
    """The unique (strict) extension of the source relation, or None."""
    return BoolEvaluator(A).unique_extend(phi, asg)


def lfp_stages(lfp: LfpRel, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT) -> list:
    """All stages of an LfpRel as relations, from the empty stage to the fixed point."""
    ev = BoolEvaluator(A)
    env = ev.env_of(asg)
    stage = np.zeros((A.n,) * lfp.arity, dtype=bool)
    out = [ev.to_relation(stage)]
    while True:
        vars_, arr = ev.tensor(lfp.body, {**env, lfp.rel: (None, stage)})
        nxt = np.array(ev._full(vars_, arr, lfp.params))
        if (nxt == stage).all():
            return out
        stage = nxt
        out.append(ev.to_relation(stage))


def so_relations(A: Structure, k: int):
    check_guard(A.n, k)
    return enumerate_relations(A.n, k)
