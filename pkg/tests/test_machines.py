import pytest
from hypothesis import given, strategies as st

from artifact.compilers import count_dnf
from artifact.fixtures import FIGURE2, M0, M1, M2
from artifact.machines import (ClockExceeded, MachineError, acc_count, parse_machine, run_tree,
                               span_count, tot_count)
from artifact.selftest import FIGURE3_DNF

ONE_STEP = """\
state q0 qF
init q0
accept qF
trans q0,0,_ -> qF,_,S,S
"""

BRANCH_SAME_OUTPUT = """\
transducer
state q0 qF
init q0
accept qF
trans q0,0,_ -> qF,_,S,S,0 | qF,_,R,S,0
"""


def full_tree(depth):
    states = [f"l{i}" for i in range(depth + 1)]
    lines = [f"state {' '.join(states)} qF", "init l0", "accept qF"]
    for i in range(depth):
        lines.append(f"trans l{i},0,_ -> l{i + 1},_,S,S | l{i + 1},_,S,S")
    lines.append(f"trans l{depth},0,_ -> qF,_,S,S")
    return "\n".join(lines)


# Self-reduction on (x1 & x3) | (!x2 & x3): a leading dummy branch, then a branch
# whenever both values of the next variable keep the formula satisfiable.
DNF_MACHINE = """\
state s r a b0 b1 c0 e0 e1 d qF
init s
accept qF
trans s,0,_ -> r,_,S,S | a,_,S,S
trans a,0,_ -> b0,_,S,S | b1,_,S,S
trans b0,0,_ -> c0,_,S,S
trans c0,0,_ -> d,_,S,S
trans b1,0,_ -> e0,_,S,S | e1,_,S,S
trans e0,0,_ -> d,_,S,S
trans e1,0,_ -> d,_,S,S
trans d,0,_ -> qF,_,S,S
"""


def test_single_accepting_run_with_empty_output():
    M = parse_machine(ONE_STEP)
    stats = run_tree(M, "0", 5)
    assert (stats.accepting_paths, stats.tot, stats.span) == (1, 0, 1)


def test_duplicate_outputs_collapse():
    M = parse_machine(BRANCH_SAME_OUTPUT)
    assert (acc_count(M, "0", 5), tot_count(M, "0", 5), span_count(M, "0", 5)) == (2, 1, 1)


def test_figure2_transducer_span():
    M = parse_machine(FIGURE2)
    stats = run_tree(M, "0", 10)
    assert stats.span == 1 and stats.outputs == {"01"}
    assert stats.accepting_paths == 2 and stats.rejecting_paths == 1


def test_deterministic_machine_has_no_branchings():
    assert tot_count(parse_machine(M0), "0101", 20) == 0


@pytest.mark.parametrize("depth", [0, 1, 2, 3, 4])
def test_full_binary_tree(depth):
    assert tot_count(parse_machine(full_tree(depth)), "0", 10) == 2 ** depth - 1


def test_dnf_machine_counts_satisfying_assignments():
    assert tot_count(parse_machine(DNF_MACHINE), "0", 10) == count_dnf(FIGURE3_DNF) == 3


def test_toy_machines():
    assert tot_count(parse_machine(M1), "100", 10) == 1
    assert tot_count(parse_machine(M2), "101", 10) == 2
    assert tot_count(parse_machine(M2), "111", 10) == 3


def test_truncated_tree_has_no_tot():
    with pytest.raises(ClockExceeded):
        tot_count(parse_machine(M0), "0101", 2)
    assert run_tree(parse_machine(M0), "0101", 2).clock_exceeded


def test_left_move_at_cell_zero_clamps():
    M = parse_machine("state q0 q1 qF\ninit q0\naccept qF\n"
                      "trans q0,1,_ -> q1,_,L,S\ntrans q1,1,_ -> qF,_,S,S\n")
    stats = run_tree(M, "1", 5)
    assert stats.clamped and stats.accepting_paths == 1


def test_work_tape():
    # write 1 on the work tape, move back and accept on reading it
    M = parse_machine("state q0 q1 q2 qF\ninit q0\naccept qF\n"
                      "trans q0,0,_ -> q1,1,S,R\ntrans q1,0,_ -> q2,_,S,L\ntrans q2,0,1 -> qF,1,S,S\n")
    assert acc_count(M, "0", 5) == 1


@pytest.mark.parametrize("text, fragment", [
    ("state q0\ninit q0\naccept qF\n", "accepting state"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,0,_ -> qF,_,S,S,1\n", "not a transducer"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,0,_ -> qF,_,S,S | qF,_,R,S | qF,_,L,S\n", "one or two"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,2,_ -> qF,_,S,S\n", "symbol"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,0,_ -> qX,_,S,S\n", "undefined state"),
    ("state q0 qF\ninit q0\naccept qF\nbogus\n", "unknown directive"),
    ("state q0 qF\ninit q0\naccept qF\ntrans q0,0,_ -> qF,_,S,S\ntrans q0,0,_ -> qF,_,R,S\n", "duplicate"),
])
def test_malformed_machines(text, fragment):
    with pytest.raises(MachineError, match=fragment):
        parse_machine(text)


def test_bad_clock_and_input():
    M = parse_machine(M0)
    with pytest.raises(ValueError):
        run_tree(M, "0", 0)
    with pytest.raises(MachineError):
        run_tree(M, "012", 5)


# ----------------------------------------------------------- random machines

STATES = ["q0", "q1", "q2"]


@st.composite
def machines(draw):
    moves = st.sampled_from(["L", "S", "R"])
    target = st.sampled_from(STATES + ["qF"])
    lines = ["transducer", f"state {' '.join(STATES)} qF", "init q0", "accept qF"]
    for q in STATES:
        for a in "01_":
            for b in "01_":
                if draw(st.integers(0, 2)) == 0:
                    continue
                acts = [f"{draw(target)},{draw(st.sampled_from('01_'))},{draw(moves)},{draw(moves)},"
                        f"{draw(st.sampled_from(['', '0', '1']))}"
                        for _ in range(draw(st.integers(1, 2)))]
                lines.append(f"trans {q},{a},{b} -> {' | '.join(acts)}")
    return parse_machine("\n".join(lines))


words = st.text("01", min_size=1, max_size=4)


@given(machines(), words)
def test_counter_invariants(M, word):
    stats = run_tree(M, word, 6)
    assert stats.accepting_paths + stats.rejecting_paths == stats.total_paths
    assert stats.accepting_paths <= stats.total_paths
    assert stats.span <= stats.accepting_paths
    assert stats.tot == stats.branchings
    if stats.outputs:
        assert stats.accepting_paths >= 1


@given(machines(), words)
def test_counts_stable_once_the_clock_suffices(M, word):
    stats = run_tree(M, word, 6)
    if not stats.clock_exceeded:
        again = run_tree(M, word, 12)
        assert (again.accepting_paths, again.total_paths, again.outputs) == \
            (stats.accepting_paths, stats.total_paths, stats.outputs)
