import pytest
from hypothesis import given, settings, strategies as st

from artifact.compilers import (CompileError, DnfSpec, GraphSpec, NfaSpec, SpecError, accepted_words,
                                compile_dnf, compile_tm_to_tot, count_census, count_cliques, count_dnf,
                                count_independent_sets, count_sinks, dnf_text, graph_text, nfa_text,
                                oracle_count, parse_dnf, parse_graph, parse_nfa, structure_word,
                                template_census, template_clique, template_is, template_sinks,
                                word_structure)
from artifact.fixpoint import FixpointEngine
from artifact.fixtures import M0, M2
from artifact.machines import parse_machine, tot_count
from artifact.selftest import C4, DUPLICATE_PATH_NFA, FIGURE3_DNF


def count(pair):
    A, alpha = pair
    return FixpointEngine(A, check_lengths=True).count(alpha)


def complete(n):
    return GraphSpec(n, frozenset((u, v) for u in range(n) for v in range(n) if u != v))


# ------------------------------------------------------------------ specs

def test_graph_parse_and_print():
    g = parse_graph("vertices 3\nsource 0\n0 1  # edge\n1 2\n")
    assert (g.n, g.source, g.edges) == (3, 0, {(0, 1), (1, 2)})
    assert parse_graph(graph_text(g)) == g
    assert parse_graph("0 4\n").n == 5


def test_dnf_parse_and_print():
    d = parse_dnf("1 3\n-2 3\n")
    assert d == FIGURE3_DNF
    assert parse_dnf(dnf_text(d)) == d
    assert parse_dnf("vars 5\n1\n").variables == 5


def test_nfa_parse_and_print():
    a = parse_nfa("states 2\nstart 0\naccept 1\nlength 2\n0 1 0\n1 1 1\n")
    assert a.edges == {(0, 1, 0), (1, 1, 1)} and a.accepting == {1}
    assert parse_nfa(nfa_text(a)) == a
    assert parse_nfa(nfa_text(DUPLICATE_PATH_NFA)) == DUPLICATE_PATH_NFA


@pytest.mark.parametrize("parser, text, fragment", [
    (parse_graph, "vertices 2\n0 5\n", "out of range"),
    (parse_graph, "0 1 2\n", "two vertices"),
    (parse_graph, "0 x\n", "line 1"),
    (parse_graph, "vertices 2\nsource 3\n", "source"),
    (parse_dnf, "1 0\n", "literal 0"),
    (parse_dnf, "vars 2\n3\n", "out of range"),
    (parse_dnf, "", "at least one"),
    (parse_nfa, "states 2\n0 1 0\n", "length"),
    (parse_nfa, "states 2\nlength 2\n0 1 2\n", "bad edge"),
    (parse_nfa, "states 2\nlength 0\n", "at least 1"),
    (parse_nfa, "states 2\nstart 4\nlength 1\n", "start"),
])
def test_malformed_specs(parser, text, fragment):
    with pytest.raises(SpecError, match=fragment):
        parser(text)


# ---------------------------------------------------------------- oracles

def test_oracle_examples():
    assert count_cliques(complete(3)) == 8
    assert count_cliques(GraphSpec(3, frozenset({(0, 1)}))) == 4       # one direction only
    assert count_independent_sets(C4) == 7
    assert count_independent_sets(GraphSpec(4, frozenset())) == 16
    assert count_dnf(FIGURE3_DNF) == 3
    assert count_sinks(GraphSpec(4, frozenset({(0, 1), (0, 2), (0, 3)}), 0)) == 3
    assert accepted_words(NfaSpec(1, frozenset({(0, 0, 0), (0, 0, 1)}), 0, frozenset({0}), 1)) == ["", "0", "1"]
    assert count_census(DUPLICATE_PATH_NFA) == 2   # start state rejects, so no empty word


def test_oracle_dispatch():
    assert oracle_count("cliques", complete(2)) == 4
    assert oracle_count("branchings", parse_machine(M2), "101", 10) == 2
    with pytest.raises(SpecError):
        oracle_count("colourings", complete(2))
    with pytest.raises(SpecError, match="clock"):
        oracle_count("branchings", parse_machine(M0), "0101", 2)
    with pytest.raises(SpecError, match="limited"):
        count_cliques(GraphSpec(9, frozenset()))


def test_sinks_need_a_source():
    with pytest.raises(SpecError):
        count_sinks(complete(2))
    with pytest.raises(SpecError):
        template_sinks(complete(2))


# -------------------------------------------------------------- templates

def test_clique_template_examples():
    assert count(template_clique(complete(3))) == 8
    assert count(template_clique(GraphSpec(1, frozenset()))) == 2
    assert count(template_clique(GraphSpec(3, frozenset()))) == 4


def test_sinks_template_examples():
    star = GraphSpec(4, frozenset({(0, 1), (0, 2), (0, 3)}), 0)
    assert count(template_sinks(star)) == 3
    # the cycle 0 <-> 1 reaches the sink 2 along infinitely many walks
    cyc = GraphSpec(3, frozenset({(0, 1), (1, 0), (1, 2)}), 0)
    assert count(template_sinks(cyc)) == 1
    assert count(template_sinks(GraphSpec(2, frozenset({(0, 1)}), 1))) == 1


def test_census_template_examples():
    both = NfaSpec(2, frozenset({(0, 1, 0), (0, 1, 1)}), 0, frozenset({1}), 2)
    assert count(template_census(both)) == 2
    unreachable = NfaSpec(3, frozenset({(0, 1, 0)}), 0, frozenset({2}), 2)
    assert count(template_census(unreachable)) == 0
    assert count(template_census(DUPLICATE_PATH_NFA)) == 2
    loop = NfaSpec(1, frozenset({(0, 0, 0), (0, 0, 1)}), 0, frozenset({0}), 1)
    assert count(template_census(loop)) == 3


@pytest.mark.parametrize("variant", ["lfp", "fo"])
def test_is_template_examples(variant):
    assert count(template_is(C4, variant)) == 7
    assert count(template_is(GraphSpec(3, frozenset()), variant)) == 8
    assert count(template_is(complete(2), variant)) == 3
    assert count(template_is(GraphSpec(1, frozenset()), variant)) == 2


def test_is_template_rejects_unknown_variant():
    with pytest.raises(ValueError):
        template_is(C4, "naive")


def test_dnf_template_examples():
    assert count(compile_dnf(FIGURE3_DNF)) == 3
    assert count(compile_dnf(DnfSpec(2, ((1, -1),)))) == 0
    assert count(compile_dnf(DnfSpec(3, ((1,), (-1,))))) == 8
    assert count(compile_dnf(DnfSpec(1, ((1,),)))) == 1
    assert count(compile_dnf(DnfSpec(2, ((1, -1), (2,))))) == 2


# ------------------------------------------------------- machine compiler

def test_word_structure_round_trip():
    A = word_structure("0110")
    assert A.n == 4 and structure_word(A) == "0110"
    with pytest.raises(CompileError):
        word_structure("")
    with pytest.raises(CompileError):
        word_structure("012")


@pytest.mark.parametrize("word", ["101", "11", "0110"])
def test_tm_compile_matches_simulator(word):
    M, A = parse_machine(M2), word_structure(word)
    assert count((A, compile_tm_to_tot(M, A))) == tot_count(M, word, len(word) ** 4)


@pytest.mark.parametrize("text, fragment", [
    ("transducer\nstate q0 qF\ninit q0\naccept qF\ntrans q0,1,_ -> qF,_,S,S,1\n", "transducers"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,1,_ -> qF,_,S,S | qF,_,S,S\n", "identical"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,1,_ -> qF,1,S,S\n", "work tape"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,1,_ -> q0,_,S,S\n", "longer"),
    ("state q0 q1 qF\ninit q0\naccept qF\ntrans q0,1,_ -> q1,_,L,S\ntrans q1,1,_ -> qF,_,S,S\n", "left"),
])
def test_tm_compile_preconditions(text, fragment):
    A = word_structure("101")
    with pytest.raises(CompileError, match=fragment):
        compile_tm_to_tot(parse_machine(text), A, 3)


def test_tm_compile_without_room_for_codes():
    with pytest.raises(CompileError, match="codes"):
        compile_tm_to_tot(parse_machine(M2), word_structure("11"), 1)


# --------------------------------------------- templates against oracles

@st.composite
def graphs(draw, max_n=5, source=False):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(n) for v in range(n)]
    edges = draw(st.sets(st.sampled_from(pairs), max_size=len(pairs)))
    src = draw(st.integers(0, n - 1)) if source else None
    return GraphSpec(n, frozenset(edges), src)


@st.composite
def dnfs(draw):
    v = draw(st.integers(1, 4))
    literal = st.integers(1, v).flatmap(lambda i: st.sampled_from([i, -i]))
    clauses = draw(st.lists(st.lists(literal, min_size=1, max_size=3).map(tuple), min_size=1, max_size=3))
    return DnfSpec(v, tuple(clauses))


@st.composite
def nfas(draw):
    s = draw(st.integers(1, 3))
    edge = st.tuples(st.integers(0, s - 1), st.integers(0, s - 1), st.integers(0, 1))
    return NfaSpec(s, frozenset(draw(st.sets(edge, max_size=6))), draw(st.integers(0, s - 1)),
                   frozenset(draw(st.sets(st.integers(0, s - 1)))), draw(st.integers(1, 3)))


@given(graphs())
def test_clique_template_vs_oracle(g):
    assert count(template_clique(g)) == count_cliques(g)


@given(graphs(source=True))
def test_sinks_template_vs_oracle(g):
    assert count(template_sinks(g)) == count_sinks(g)


@settings(max_examples=25)
@given(graphs(max_n=4), st.sampled_from(["lfp", "fo"]))
def test_is_template_vs_oracle(g, variant):
    assert count(template_is(g, variant)) == count_independent_sets(g)


@settings(max_examples=25)
@given(dnfs())
def test_dnf_template_vs_oracle(d):
    assert count(compile_dnf(d)) == count_dnf(d)


@settings(max_examples=30)
@given(nfas())
def test_census_template_vs_oracle(a):
    assert count(template_census(a)) == count_census(a)
