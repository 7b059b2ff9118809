import itertools
import math

import pytest
from hypothesis import given, strategies as st

from artifact.boolsem import Assignment, eval_bool
from artifact.compilers import GraphSpec, clique_condition, count_cliques, template_clique
from artifact.expl import (EMPTY, EPSILON_SET, INFINITE, Evaluator, FunTable, cardinality,
                           concat_sets, count, expl, union)
from artifact.formula.ast import (BOTTOM, TOP, Add, Bool, Eq, FOVar, FormulaError, FunAppFO, Leq,
                                  Mul, Not, RelApp, SOApp, SOVar, SumFO, SumSO, formula_length)
from artifact.formula.parser import parse_qformula
from artifact.selftest import random_table_pair, subset_of
from artifact.structure import GuardExceeded, RelationValue, Structure, relation

A2 = Structure(2, {"R": relation(1, [1]), "E": relation(2, [(0, 1)])})
B0 = relation(1, [0])
ASG = Assignment({"x": 1}, {"X": B0})


# ------------------------------------------------------------- the seven rows

def test_true_leaf_is_epsilon():
    assert expl(Bool(RelApp("R", ("x",))), A2, ASG) == {()}


def test_false_leaf_is_empty():
    assert expl(Bool(Not(RelApp("R", ("x",)))), A2, ASG) == set()


def test_first_order_variable():
    assert expl(FOVar("x"), A2, ASG) == {(1,)}


def test_second_order_variable():
    assert expl(SOVar("X"), A2, ASG) == {(B0,)}


def test_sum_is_union_and_dedupes():
    assert expl(Add(FOVar("x"), FOVar("x")), A2, ASG) == {(1,)}


def test_product_with_false_is_empty():
    assert expl(Mul(SumFO("y", FOVar("y")), Bool(BOTTOM)), A2, ASG) == set()


def test_product_concatenates_in_order():
    q = Mul(SOVar("X"), FOVar("x"))
    assert expl(q, A2, ASG) == {(B0, 1)}


def test_first_order_sum():
    assert expl(SumFO("y", Mul(Bool(RelApp("E", ("x", "y"))), FOVar("y"))), A2,
                ASG.bind_fo("x", 0)) == {(1,)}


def test_second_order_sum_ranges_over_all_relations():
    got = expl(SumSO("Y", 1, SOVar("Y")), A2)
    assert got == {(relation(1),), (relation(1, [0]),), (relation(1, [1]),), (relation(1, [0, 1]),)}


def test_function_lookup():
    h = FunTable("fo", 1, {(1,): frozenset({(0,), ()})})
    assert expl(FunAppFO("f", ("x",)), A2, ASG, {"f": h}) == {(0,), ()}


def test_missing_table_entry_is_empty():
    assert expl(FunAppFO("f", ("x",)), A2, ASG, {"f": FunTable("fo", 1)}) == set()


def test_missing_function_is_an_error():
    with pytest.raises(FormulaError):
        expl(FunAppFO("f", ("x",)), A2, ASG)


def test_lfp_without_engine_is_an_error():
    q = parse_qformula("lfp f(x) = x in f(x)")
    with pytest.raises(FormulaError):
        expl(q, A2, ASG)


def test_so_sum_guard():
    with pytest.raises(GuardExceeded):
        expl(SumSO("Y", 2, SOVar("Y")), Structure(5))


# ---------------------------------------------------------- concatenation

def test_worked_concatenation():
    s1 = frozenset({(), ("a1",), ("a2", "a3")})
    s2 = frozenset({(), ("a2", "a3")})
    assert concat_sets(s1, s2) == {(), ("a2", "a3"), ("a1",), ("a1", "a2", "a3"), ("a2", "a3", "a2", "a3")}


def test_epsilon_is_identity():
    s = frozenset({(1,), (0, 1)})
    assert concat_sets(s, EPSILON_SET) == s
    assert concat_sets(EPSILON_SET, s) == s


def test_empty_annihilates():
    s = frozenset({(1,)})
    assert concat_sets(s, EMPTY) == EMPTY
    assert concat_sets(INFINITE, EMPTY) == EMPTY
    assert concat_sets(EMPTY, INFINITE) == EMPTY


def test_infinite_is_sticky():
    s = frozenset({(1,)})
    assert concat_sets(INFINITE, s) is INFINITE
    assert union(EMPTY, INFINITE) is INFINITE
    assert cardinality(INFINITE) == math.inf


strings = st.frozensets(st.lists(st.integers(0, 2), max_size=3).map(tuple), max_size=5)


@given(strings, strings)
def test_size_bounds(s1, s2):
    assert len(concat_sets(s1, s2)) <= len(s1) * len(s2)
    assert len(union(s1, s2)) <= len(s1) + len(s2)


@given(strings, strings)
def test_concat_against_definition(s1, s2):
    assert concat_sets(s1, s2) == {a + b for a in s1 for b in s2}


# --------------------------------------------------------------- counts

def k3():
    return GraphSpec(3, frozenset((u, v) for u in range(3) for v in range(3) if u != v))


def test_clique_count_on_k3():
    A, q = template_clique(k3())
    assert count(q, A) == 8 == count_cliques(k3())


def test_clique_count_on_empty_two_vertex_graph():
    g = GraphSpec(2, frozenset())
    A, q = template_clique(g)
    assert count(q, A) == 3 == count_cliques(g)


def test_bare_clique_condition_counts_one():
    # without the $X witness every clique contributes the same empty string
    A, _ = template_clique(k3())
    assert count(SumSO("X", 1, Bool(clique_condition("X"))), A) == 1


def test_false_counts_zero():
    assert count(Bool(BOTTOM), A2) == 0


# ------------------------------------------------ independent set-based oracle

def oracle(q, A, fo, so, F):
    if isinstance(q, Bool):
        return {()} if eval_bool(q.formula, A, Assignment(fo, so)) else set()
    if isinstance(q, FOVar):
        return {(fo[q.name],)}
    if isinstance(q, SOVar):
        return {(so[q.name],)}
    if isinstance(q, Add):
        return oracle(q.left, A, fo, so, F) | oracle(q.right, A, fo, so, F)
    if isinstance(q, Mul):
        left, right = oracle(q.left, A, fo, so, F), oracle(q.right, A, fo, so, F)
        return {a + b for a in left for b in right}
    if isinstance(q, SumFO):
        return set().union(*(oracle(q.body, A, {**fo, q.var: a}, so, F) for a in range(A.n)))
    if isinstance(q, SumSO):
        tuples = list(itertools.product(range(A.n), repeat=q.arity))
        out = set()
        for r in range(len(tuples) + 1):
            for c in itertools.combinations(tuples, r):
                out |= oracle(q.body, A, fo, {**so, q.var: RelationValue(q.arity, frozenset(c))}, F)
        return out
    if isinstance(q, FunAppFO):
        return set(F[q.fun].get(tuple(fo[x] for x in q.args), ()))
    raise TypeError(q)


names = st.sampled_from(["x", "y"])


@st.composite
def qformulas(draw, depth=3):
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        a, b = draw(names), draw(names)
        return draw(st.sampled_from([
            FOVar(a), SOVar("X"), FunAppFO("f", (a,)), Bool(TOP), Bool(RelApp("R", (a,))),
            Bool(Leq(a, b)), Bool(Eq(a, b)), Bool(SOApp("X", (a,))), Bool(Not(RelApp("E", (a, b)))),
        ]))
    kind = draw(st.sampled_from(["add", "mul", "sum", "Sum"]))
    if kind == "sum":
        return SumFO(draw(names), draw(qformulas(depth - 1)))
    if kind == "Sum":
        return SumSO("X", 1, draw(qformulas(depth - 1)))
    return (Add if kind == "add" else Mul)(draw(qformulas(depth - 1)), draw(qformulas(depth - 1)))


@st.composite
def setups(draw):
    n = draw(st.integers(1, 3))
    pairs = list(itertools.product(range(n), repeat=2))
    A = Structure(n, {"E": RelationValue(2, draw(st.frozensets(st.sampled_from(pairs)))),
                      "R": RelationValue(1, draw(st.frozensets(st.sampled_from([(a,) for a in range(n)]))))})
    fo = {"x": draw(st.integers(0, n - 1)), "y": draw(st.integers(0, n - 1))}
    X = RelationValue(1, draw(st.frozensets(st.sampled_from([(a,) for a in range(n)]))))
    table = {(a,): frozenset(draw(st.frozensets(st.lists(st.integers(0, n - 1), max_size=2).map(tuple),
                                                max_size=2))) for a in range(n)}
    return A, fo, X, table


@given(qformulas(), setups())
def test_matches_set_oracle(q, setup):
    A, fo, X, table = setup
    F = {"f": FunTable("fo", 1, table)}
    got = Evaluator(A).expl(q, Assignment(fo, {"X": X}), F)
    assert got == oracle(q, A, fo, {"X": X}, {"f": table})


def _function_free(q):
    from artifact.formula.fragments import function_free
    return function_free(q)


@given(qformulas(), setups())
def test_length_bound(q, setup):
    A, fo, X, _ = setup
    if not _function_free(q):
        return
    ev = Evaluator(A, check_lengths=True)
    value = ev.expl(q, Assignment(fo, {"X": X}))
    assert all(len(s) <= formula_length(q) for s in value)


@given(qformulas(), setups())
def test_letter_kinds_follow_outputs(q, setup):
    from artifact.formula.fragments import X_free, x_free
    A, fo, X, table = setup
    value = Evaluator(A).expl(q, Assignment(fo, {"X": X}), {"f": FunTable("fo", 1, table)})
    letters = [a for s in value for a in s]
    if X_free(q):
        assert all(isinstance(a, int) for a in letters)
    if x_free(q) and _function_free(q):
        assert all(isinstance(a, RelationValue) for a in letters)


@given(st.randoms(use_true_random=False))
def test_monotone_in_tables(rng):
    n = rng.randint(1, 3)
    A = Structure(n, {"R": relation(1, [0]), "E": relation(2, [(0, 0)])})
    # x * f(x) + sum y. [!E(x, y)] * f(y) * y
    q = Add(Mul(FOVar("x"), FunAppFO("f", ("x",))),
            SumFO("y", Mul(Mul(Bool(Not(RelApp("E", ("x", "y")))), FunAppFO("f", ("y",))), FOVar("y"))))
    h, g = random_table_pair(rng, n)
    ev = Evaluator(A)
    for a in range(n):
        asg = Assignment({"x": a})
        assert subset_of(ev.expl(q, asg, {"f": h}), ev.expl(q, asg, {"f": g}))


def test_fast_path_sum_agrees_with_enumeration():
    A = Structure(3, {"R": relation(1, [0, 2])})
    fast = parse_qformula("Sum Y:1. [forall y. Y(y) <-> R(y)] * $Y", sentence=True)
    assert expl(fast, A) == {(relation(1, [0, 2]),)}
    assert expl(fast, A) == oracle(fast, A, {}, {}, {})
