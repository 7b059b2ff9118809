import math

import pytest
from hypothesis import given, settings, strategies as st

from artifact.boolsem import Assignment
from artifact.compilers import GraphSpec, count_sinks, template_is, template_sinks
from artifact.expl import INFINITE, FunTable
from artifact.fixpoint import (Capped, Diverged, FixpointEngine, RestrictedSO, StrictChain,
                               build_connection_graph, detect_infinite, evaluate, iterate_once,
                               lfp_eval, parse_policy, policy_for, reach)
from artifact.fixtures import (ACC_PSPACE_BODY, FIGURE2, INFINITE_BODY, ZETA_BODY, lfp_so,
                               span_l_fixture)
from artifact.formula.ast import FormulaError, LfpFO
from artifact.formula.fragments import FragmentTag
from artifact.formula.parser import parse_bool, parse_qformula
from artifact.machines import parse_machine, span_count
from artifact.selftest import (C4, STRICT_EXTEND_BODY, capped_verdict, random_detector_body,
                               random_graph, random_relation)
from artifact.structure import Structure, enumerate_relations, relation

ONE = Structure(1)
B1 = relation(1, [0])
AT_B1 = Assignment({}, {"X0": B1})


def sinks_lfp():
    return parse_qformula("lfp f(x) = [forall y. !E(x, y)] * x + sum y. [E(x, y)] * f(y) in f(s)")


def path(n):
    return Structure(n, {"E": relation(2, [(i, i + 1) for i in range(n - 1)])})


# ----------------------------------------------------------------- lfp_eval

def test_sinks_on_a_path():
    assert lfp_eval(sinks_lfp(), path(3), Assignment({"s": 0})) == {(2,)}


def test_infinite_example():
    assert lfp_eval(lfp_so(INFINITE_BODY), ONE, AT_B1) is INFINITE


def test_zeta_is_empty():
    assert lfp_eval(lfp_so(ZETA_BODY), ONE, AT_B1) == set()


def test_infinite_example_from_empty_argument():
    # the empty relation never satisfies X(min), and Y == X keeps it empty
    assert lfp_eval(lfp_so(INFINITE_BODY), ONE, Assignment({}, {"X0": relation(1)})) == set()


def test_star_has_three_sinks():
    g = GraphSpec(4, frozenset({(0, 1), (0, 2), (0, 3)}), 0)
    A, q = template_sinks(g)
    assert evaluate(q, A) == {(1,), (2,), (3,)}


def test_cycle_without_sink_gives_nothing():
    A, q = template_sinks(GraphSpec(3, frozenset({(0, 1), (1, 2), (2, 0)}), 0))
    assert evaluate(q, A) == set()


@given(st.randoms(use_true_random=False))
def test_sinks_match_graph_search(rng):
    g = random_graph(rng, rng.randint(1, 6), p=0.3, loops=True, source=True)
    A, q = template_sinks(g)
    assert len(evaluate(q, A)) == count_sinks(g)


def test_acc_pspace_counts_insertion_orders():
    for n in (1, 2, 3):
        q = lfp_so(ACC_PSPACE_BODY)
        got = FixpointEngine(Structure(n)).count(q, Assignment({}, {"X0": relation(1)}))
        assert got == math.factorial(n)


def test_span_fixture_counts_distinct_outputs():
    M = parse_machine(FIGURE2)
    A, q = span_l_fixture(M, "0")
    engine = FixpointEngine(A)
    assert engine.count(q) == span_count(M, "0", 10) == 1
    assert [r.tag for r in engine.runs] == [FragmentTag.RfoSfoFO]


# -------------------------------------------------------------- iterate_once

def span_setup():
    M = parse_machine(FIGURE2)
    A, q = span_l_fixture(M, "0")
    lfp = q.body.right
    assert isinstance(lfp, LfpFO)
    return A, lfp


def test_first_iterate_marks_accepting_arguments():
    A, lfp = span_setup()
    h1 = iterate_once(lfp, A, Assignment(), FunTable("fo", 1))
    for c in range(A.n):
        assert h1[(c,)] == ({()} if (c,) in A["Acc"] else set())


def test_iterates_increase_and_settle():
    A, lfp = span_setup()
    h = FunTable("fo", 1)
    for _ in range(A.n + 2):
        nxt = iterate_once(lfp, A, Assignment(), h)
        assert h <= nxt
        h = nxt
    assert iterate_once(lfp, A, Assignment(), h) == h


def test_iterate_once_leaves_input_alone():
    A, lfp = span_setup()
    h = FunTable("fo", 1)
    iterate_once(lfp, A, Assignment(), h)
    assert h.entries == {}


# ---------------------------------------------------------- connection graphs

X_Y = {"X": 1, "Y": 1}


def test_equality_gives_self_loops():
    G = build_connection_graph(parse_bool("Y == X", free_so=X_Y), ONE, 1)
    assert G.edges() == {(relation(1), relation(1)), (B1, B1)}


def test_false_gives_no_edges():
    G = build_connection_graph(parse_bool("false", free_so=X_Y), Structure(2), 1)
    assert G.edges() == set()
    assert not reach(G, relation(1), relation(1, [0]))


STRICT = "(forall x. Y(x) <-> X(x) | x = min) & (exists x. !X(x) & Y(x))"


def test_strict_extension_is_acyclic():
    for n in (1, 2, 3):
        G = build_connection_graph(parse_bool(STRICT, free_so=X_Y), Structure(n), 1)
        for B, C in G.edges():
            assert B.tuples < C.tuples


def test_reach():
    G = build_connection_graph(parse_bool(STRICT, free_so=X_Y), ONE, 1)
    assert reach(G, relation(1), relation(1))
    assert reach(G, relation(1), B1)
    assert not reach(G, B1, relation(1))


def test_extend_shape_builds_only_the_chain():
    G = build_connection_graph(parse_bool(STRICT, free_so=X_Y), Structure(3), 1, root=relation(1))
    assert len(G.adjacency) == 2


# ---------------------------------------------------------------- detector

def test_detector_on_the_examples():
    assert detect_infinite(lfp_so(INFINITE_BODY), ONE, AT_B1)
    assert not detect_infinite(lfp_so(ZETA_BODY), ONE, AT_B1)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_detector_rejects_strict_extensions(n):
    for B in enumerate_relations(n, 1):
        assert not detect_infinite(lfp_so(STRICT_EXTEND_BODY), Structure(n), Assignment({}, {"X0": B}))


def test_detector_needs_the_shape():
    with pytest.raises(FormulaError):
        detect_infinite(lfp_so("[X(min)] + Sum Y:1. [Y == X] * f(Y) * f(Y)"), ONE, AT_B1)


@settings(max_examples=40)
@given(st.randoms(use_true_random=False))
def test_detector_matches_capped_growth(rng):
    n = rng.randint(1, 2)
    lfp = lfp_so(random_detector_body(rng))
    asg = Assignment({}, {"X0": random_relation(rng, n, 1)})
    assert detect_infinite(lfp, Structure(n), asg) == capped_verdict(lfp, Structure(n), asg)


# ---------------------------------------------------------------- policies

def test_parse_policy():
    assert parse_policy("strict") == StrictChain()
    assert parse_policy("restricted") == RestrictedSO()
    assert parse_policy("cap:7") == Capped(7)
    assert parse_policy(None) is None
    assert parse_policy(None, 9) == Capped(9)
    for bad in ("cap:x", "fast", "cap:0"):
        with pytest.raises(ValueError):
            parse_policy(bad)


def test_policy_selection():
    assert policy_for(FragmentTag.RsoR_SsoR_LFP) == StrictChain()
    assert policy_for(FragmentTag.RsoR_SsoSO) == RestrictedSO()
    assert policy_for(FragmentTag.General) == Capped()


def test_cap_raises_diverged():
    q = lfp_so(INFINITE_BODY)
    with pytest.raises(Diverged) as info:
        FixpointEngine(ONE, Capped(5)).count(q, AT_B1)
    assert info.value.iterations > 5
    assert "diverged after" in str(info.value)


def test_oversized_product_counts_as_divergence():
    q = parse_qformula("sum s. [s = min] * (lfp f(x) = x + (sum y. f(y) * f(y)) in f(s))", sentence=True)
    with pytest.raises(Diverged):
        FixpointEngine(ONE).count(q)


def test_restricted_policy_needs_the_shape():
    with pytest.raises(FormulaError):
        FixpointEngine(ONE, RestrictedSO()).count(lfp_so("[X(min)] + Sum Y:1. [Y == X] * f(Y) * f(Y)"),
                                                  AT_B1)


def test_strict_chain_bound_on_independent_sets():
    A, q = template_is(C4, "lfp")
    engine = FixpointEngine(A)
    assert engine.count(q) == 7
    (run,) = engine.runs
    assert isinstance(run.policy, StrictChain)
    assert run.iterations <= A.n ** 2 + 1


def test_trace_lines():
    lines = []
    FixpointEngine(path(3), trace=lines.append).count(sinks_lfp(), Assignment({"s": 0}))
    assert lines and all(line.startswith("lfp f iter") for line in lines)


def test_fo_lfp_is_tabulated_everywhere():
    engine = FixpointEngine(path(4))
    engine.count(sinks_lfp(), Assignment({"s": 0}))
    assert engine.runs[0].domain == 4
