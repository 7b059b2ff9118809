"""Counting problems encoded as (Structure, quantitative sentence) pairs.

Each template returns a structure together with a sentence whose count is
the answer to the problem on that instance.  Constants such as a source
vertex are bound by an outer ``sum s. [s is the i-th element] * ...``.
"""
from __future__ import annotations

from ..formula.ast import (TOP, Add, And, Bool, BOTTOM, Eq, ExistsFO, FOVar, ForallFO, FunAppFO,
                           FunAppSO, Iff, Implies, Leq, LfpFO, LfpSO, Mul, Not, Or, RelApp, SOApp,
                           SOVar, SumFO, SumSO, conj, exists, forall, plus, times)
from ..formula.macros import Fresh, elem, is_max, is_min, lt, neq, succ
from ..structure import RelationValue, Structure
from .specs import DnfSpec, GraphSpec, NfaSpec, SpecError


def _rel(arity, tuples):
    return RelationValue(arity, frozenset(tuples))


def _at(d: int, var: str, fresh: Fresh) -> Bool:
    return Bool(elem(var, d, fresh))


def _packed(rel: str, slot: int, x: str, fresh: Fresh):
    """Membership of x in the slot-th unary relation packed into the binary rel."""
    w = fresh()
    return ExistsFO(w, And(elem(w, slot, fresh), SOApp(rel, (w, x))))


def _is_empty(rel: str, arity: int, fresh: Fresh):
    vs = fresh.many(arity)
    return forall(vs, Not(SOApp(rel, vs)))


def _starts_empty(lfp: LfpSO, start: str) -> SumSO:
    """Sum X0. [X0 is the empty relation] * lfp(... X0)."""
    vs = ("t", "u") if lfp.arity == 2 else tuple(f"t{i}" for i in range(lfp.arity))
    define = forall(vs, Iff(SOApp(start, vs), BOTTOM))
    return SumSO(start, lfp.arity, Mul(Bool(define), lfp))


# ---------------------------------------------------------------- cliques

def clique_condition(var: str = "X"):
    return forall(("x", "y"), Implies(conj(SOApp(var, ("x",)), SOApp(var, ("y",)), neq("x", "y")),
                                      RelApp("E", ("x", "y"))))


def template_clique(g: GraphSpec):
    """Sum X. $X * [X is a clique]: one string per clique, the empty set included."""
    A = Structure(g.n, {"E": _rel(2, g.edges)})
    return A, SumSO("X", 1, Mul(SOVar("X"), Bool(clique_condition("X"))))


# ------------------------------------------------------------------ sinks

def template_sinks(g: GraphSpec):
    """Distinct sinks reachable from the source vertex."""
    if g.source is None:
        raise SpecError("the sinks template needs a source vertex")
    fresh = Fresh("_c")
    A = Structure(g.n, {"E": _rel(2, g.edges)})
    body = Add(Mul(Bool(ForallFO("y", Not(RelApp("E", ("x", "y"))))), FOVar("x")),
               SumFO("y", Mul(Bool(RelApp("E", ("x", "y"))), FunAppFO("f", ("y",)))))
    lfp = LfpFO("f", ("x",), body, ("s",))
    return A, SumFO("s", Mul(_at(g.source, "s", fresh), lfp))


# ----------------------------------------------------------------- census

def template_census(a: NfaSpec):
    """Words of length at most m accepted by the NFA.

    States are elements 0..n-1 and padding elements n..n+m-1 form L.  The
    second lfp argument is a clock that starts at n-1 and advances one step
    per letter, so at most m letters are read.  Letters are output as the
    least (0) and second least (1) elements.
    """
    fresh = Fresh("_c")
    n, m = a.states, a.length
    N = n + m
    A = Structure(N, {
        "L": _rel(1, [(i,) for i in range(n, N)]),
        "E0": _rel(2, [(p, q) for p, q, x in a.edges if x == 0]),
        "E1": _rel(2, [(p, q) for p, q, x in a.edges if x == 1]),
        "F": _rel(1, [(q,) for q in a.accepting]),
    })
    w = fresh()
    below_max = ExistsFO(w, And(is_max(w, fresh), Leq("y", w)))
    min0 = SumFO("z", Mul(Bool(is_min("z", fresh)), FOVar("z")))
    min1 = SumFO("z", Mul(_at(1, "z", fresh), FOVar("z")))
    letter = Add(Mul(Bool(RelApp("E0", ("x", "x'"))), min0),
                 Mul(Bool(RelApp("E1", ("x", "x'"))), min1))
    step = SumFO("x'", SumFO("y'", times(Bool(succ("y", "y'", fresh)), letter, FunAppFO("f", ("x'", "y'")))))
    body = Add(Bool(RelApp("F", ("x",))), Mul(Bool(below_max), step))
    lfp = LfpFO("f", ("x", "y"), body, ("s", "t"))
    start = Bool(And(elem("s", a.start, fresh), elem("t", n - 1, fresh)))
    return A, SumFO("s", SumFO("t", Mul(start, lfp)))


# ---------------------------------------------------- independent sets

def _is_parts(P: str, fresh: Fresh):
    I = lambda v: _packed(P, 0, v, fresh)
    Ex = lambda v: _packed(P, 1, v, fresh)

    def phi(x):
        # the least unexamined vertex that can go either way
        y, x2, y2, w = fresh(), fresh(), fresh(), fresh()
        # an earlier vertex is settled if examined, or blocked by a member of I
        blocked = And(ExistsFO(y2, And(I(y2), RelApp("E", (x2, y2)))),
                      Or(ExistsFO(w, I(w)), Not(is_max(x, fresh))))
        return conj(RelApp("V", (x,)), Not(Ex(x)),
                    ForallFO(y, Implies(I(y), Not(RelApp("E", (x, y))))),
                    ForallFO(x2, Implies(lt(x2, x), Or(Ex(x2), blocked))))
    return I, Ex, phi


def _is_formulae(P: str, fresh: Fresh):
    I, Ex, phi = _is_parts(P, fresh)
    x = fresh()
    can_extend = ExistsFO(x, phi(x))

    def extend(target: str, include: bool):
        t, z = "t", "z"
        y = fresh()
        marked = And(elem(t, 1, fresh), ExistsFO(y, And(Leq(z, y), phi(y))))
        added = Or(And(is_min(t, fresh), phi(z)), marked) if include else marked
        base = forall((t, z), Iff(SOApp(target, (t, z)), Or(SOApp(P, (t, z)), added)))
        witness = exists((t, z), And(Not(SOApp(P, (t, z))), SOApp(target, (t, z))))
        return And(base, witness)

    return can_extend, extend("Q", True), extend("Q", False), Ex


def _is_structure(g: GraphSpec) -> Structure:
    sym = g.symmetrized()
    N = max(g.n, 2)
    return Structure(N, {"E": _rel(2, sym.edges), "V": _rel(1, [(v,) for v in range(g.n)])})


def template_is(g: GraphSpec, variant: str = "lfp"):
    """Independent sets, via the fixed-point ("lfp") or first-order ("fo") recursion.

    One binary relation P packs the current set I (row 0) and the examined
    vertices Ex (row 1).  Each vertex that can be both included and excluded
    is a branching; the count is one plus the number of branchings.
    """
    if variant not in ("lfp", "fo"):
        raise ValueError("variant must be 'lfp' or 'fo'")
    fresh = Fresh("_c")
    A = _is_structure(g)
    can_extend, include, exclude, Ex = _is_formulae("P", fresh)
    guard = Bool(can_extend)
    if variant == "lfp":
        v = fresh()
        base = Bool(ForallFO(v, Not(Ex(v))))
        branches = [SumSO("Q", 2, times(SOVar("P"), guard,
                                         Add(Bool(TOP), Mul(Bool(psi), FunAppSO("f", "Q")))))
                    for psi in (include, exclude)]
        body = plus(base, *branches)
    else:
        base = Mul(Bool(_is_empty("P", 2, fresh)), SOVar("P"))
        branches = [SumSO("Q", 2, times(Bool(psi), SOVar("Q"), FunAppSO("f", "Q")))
                    for psi in (include, exclude)]
        body = Add(base, Mul(guard, plus(*branches, Bool(TOP))))
    return A, _starts_empty(LfpSO("f", "P", 2, body, "P0"), "P0")


# ------------------------------------------------------------------- DNF

def compile_dnf(d: DnfSpec):
    """Satisfying assignments of a DNF by self-reduction on the variables in order.

    P packs the truth values T (row 0) and the assigned variables Ex (row 1).
    The next variable is the least unassigned one.  When both values keep
    the formula satisfiable the recursion branches; when only one does it
    takes that value deterministically.  Clauses holding a literal and its
    negation are left out of Cl, so no assignment can satisfy them.
    """
    fresh = Fresh("_c")
    v, c = d.variables, len(d.clauses)
    N = max(v, c, 2)
    pos = {(i, abs(l) - 1) for i, cl in enumerate(d.clauses) for l in cl if l > 0}
    neg = {(i, abs(l) - 1) for i, cl in enumerate(d.clauses) for l in cl if l < 0}
    A = Structure(N, {"Pos": _rel(2, pos), "Neg": _rel(2, neg),
                      "Cl": _rel(1, [(i,) for i, cl in enumerate(d.clauses)
                                     if not {abs(l) for l in cl if l > 0} & {abs(l) for l in cl if l < 0}]),
                      "V": _rel(1, [(i,) for i in range(v)])})
    T = lambda u: _packed("X", 0, u, fresh)
    Ex = lambda u: _packed("X", 1, u, fresh)

    def consistent(x=None, value=None):
        cl, y = fresh(), fresh()
        pos_ok = Or(Not(Ex(y)), T(y))
        neg_ok = Or(Not(Ex(y)), Not(T(y)))
        if x is not None:
            hit, miss = Eq(y, x), neq(y, x)
            pos_ok = Or(hit, pos_ok) if value else And(miss, pos_ok)
            neg_ok = And(miss, neg_ok) if value else Or(hit, neg_ok)
        body = And(Implies(RelApp("Pos", (cl, y)), pos_ok), Implies(RelApp("Neg", (cl, y)), neg_ok))
        return ExistsFO(cl, And(RelApp("Cl", (cl,)), ForallFO(y, body)))

    def nxt(x):
        x2 = fresh()
        return conj(RelApp("V", (x,)), Not(Ex(x)), ForallFO(x2, Implies(lt(x2, x), Ex(x2))))

    def extend(psi_of):
        t, z = "t", "z"
        base = forall((t, z), Iff(SOApp("Y", (t, z)), Or(SOApp("X", (t, z)), psi_of(t, z))))
        witness = exists((t, z), And(Not(SOApp("X", (t, z))), SOApp("Y", (t, z))))
        return And(base, witness)

    set_true = extend(lambda t, z: And(nxt(z), Or(is_min(t, fresh), elem(t, 1, fresh))))
    set_false = extend(lambda t, z: And(nxt(z), elem(t, 1, fresh)))
    forced = extend(lambda t, z: And(nxt(z), Or(elem(t, 1, fresh),
                                                 And(is_min(t, fresh), consistent(z, True)))))
    x1, x2 = fresh(), fresh()
    branch = ExistsFO(x1, conj(nxt(x1), consistent(x1, True), consistent(x1, False)))
    open_ = ExistsFO(x2, And(nxt(x2), Or(consistent(x2, True), consistent(x2, False))))

    def step(psi):
        return SumSO("Y", 2, times(Bool(psi), SOVar("Y"), FunAppSO("f", "Y")))

    base = Mul(Bool(And(_is_empty("X", 2, fresh), consistent())), SOVar("X"))
    body = plus(base,
                Mul(Bool(branch), plus(step(set_false), step(set_true), Bool(TOP))),
                Mul(Bool(Not(branch)), Mul(Bool(open_), step(forced))))
    return A, _starts_empty(LfpSO("f", "X", 2, body, "X0"), "X0")


__all__ = ["clique_condition", "compile_dnf", "template_census", "template_clique", "template_is",
           "template_sinks"]
