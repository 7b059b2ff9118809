"""Small worked instances shared by the self-test and the test suite.

Machines are given in the text format of artifact.machines.  The formula
builders return ASTs; the texts are in the surface syntax of the parser.
"""
from __future__ import annotations

from collections import deque

from .formula.ast import Add, Bool, FOVar, FunAppFO, LfpFO, Mul, RelApp, SumFO, plus
from .formula.macros import Fresh, is_min
from .formula.parser import parse_qformula
from .machines import BLANK, MOVES, MachineSpec, parse_machine
from .structure import RelationValue, Structure

# deterministic: scan to the first blank and accept
M0 = """\
state q0 qF
init q0
accept qF
trans q0,0,_ -> q0,_,R,S
trans q0,1,_ -> q0,_,R,S
trans q0,_,_ -> qF,_,S,S
"""

# on the first 1 either accept or scan on and reject at the blank
M1 = """\
state q0 qF
init q0
accept qF
trans q0,1,_ -> qF,_,S,S | q0,_,R,S
trans q0,0,_ -> q0,_,R,S
"""

# on every 1 either move on or accept; accept at the blank
M2 = """\
state q0 qF
init q0
accept qF
trans q0,1,_ -> q0,_,R,S | qF,_,S,S
trans q0,0,_ -> q0,_,R,S
trans q0,_,_ -> qF,_,S,S
"""

# three outputs (01, 01 and a rejected 010), one distinct accepted output
FIGURE2 = """\
transducer
state s0 s1 s3 s4 s5 sr qF
init s0
accept qF
trans s0,0,_ -> s1,_,S,S,0
trans s1,0,_ -> s3,_,S,S,1 | s4,_,S,S
trans s3,0,_ -> sr,_,S,S,0
trans s4,0,_ -> qF,_,S,S,1 | s5,_,S,S,1
trans s5,0,_ -> qF,_,S,S
"""

TOY_MACHINES = {"m0": (M0, "010"), "m1": (M1, "100"), "m2": (M2, "101")}

# Sum Y. [Y == X] * $Y * f(Y), with and without the X(min) base case
INFINITE_BODY = "(Sum Y:1. [Y == X] * $Y * f(Y)) + [X(min)]"
ZETA_BODY = "Sum Y:1. [Y == X] * $Y * f(Y)"


def lfp_so(body: str, arity: int = 1, arg: str = "X0"):
    return parse_qformula(f"lfp f(X:{arity}) = {body} in f({arg})", free_so={arg: arity})


def toy_machine(name: str) -> tuple[MachineSpec, str]:
    text, word = TOY_MACHINES[name]
    return parse_machine(text), word


# ------------------------------------------------------------ span_L shape

def configuration_graph(M: MachineSpec, word: str):
    """Reachable configurations with their labelled moves.

    Returns (configs, moves) where configs is a list (the start first) of
    (state, input head, work tape, work head) and moves holds
    (source index, choice, target index, output bit or None).
    """
    start = (M.initial, 0, (), 0)
    index = {start: 0}
    configs, moves = [start], []
    queue = deque([start])
    while queue:
        c = queue.popleft()
        state, ipos, work, wpos = c
        if state == M.accepting:
            continue
        a = word[ipos] if ipos < len(word) else BLANK
        b = work[wpos] if wpos < len(work) else BLANK
        for choice, act in enumerate(M.transitions.get((state, a, b), ())):
            cells = list(work) + [BLANK] * (wpos + 1 - len(work))
            cells[wpos] = act.write
            while cells and cells[-1] == BLANK:
                cells.pop()
            nxt = (act.state, max(ipos + MOVES[act.input_move], 0), tuple(cells),
                   max(wpos + MOVES[act.work_move], 0))
            if nxt not in index:
                index[nxt] = len(configs)
                configs.append(nxt)
                queue.append(nxt)
            moves.append((index[c], choice, index[nxt], act.output))
    return configs, moves


def span_l_formula():
    """acc(x) + sum y. sum z. (output_0 + output_1 + next_0 + next_1) * f(y), applied to min."""
    parts = [Mul(Bool(RelApp(f"O{i}", ("x", "y", "z"))), FOVar("z")) for i in (0, 1)]
    parts += [Bool(RelApp(f"N{i}", ("x", "y"))) for i in (0, 1)]
    moves = plus(*parts)
    return Add(Bool(RelApp("Acc", ("x",))), SumFO("y", SumFO("z", Mul(moves, FunAppFO("f", ("y",))))))


def span_l_fixture(M: MachineSpec, word: str):
    """Structure of M's configuration graph on word, and the span sentence started at element 0.

    Output bits are the elements 0 and 1, so the universe has at least two
    elements.  The start configuration is element 0.
    """
    configs, moves = configuration_graph(M, word)
    n = max(len(configs), 2)
    rel = {"Acc": RelationValue(1, frozenset((i,) for i, c in enumerate(configs) if c[0] == M.accepting))}
    for i in (0, 1):
        rel[f"N{i}"] = RelationValue(2, frozenset((s, t) for s, ch, t, out in moves if ch == i and out is None))
        rel[f"O{i}"] = RelationValue(3, frozenset((s, t, int(out)) for s, ch, t, out in moves
                                                  if ch == i and out is not None))
    A = Structure(n, rel)
    lfp = LfpFO("f", ("x",), span_l_formula(), ("s",))
    return A, SumFO("s", Mul(Bool(is_min("s", Fresh("_c"))), lfp))


# --------------------------------------------------------- acc_pspace shape

ACC_PSPACE_BODY = ("[forall x. X(x)] + Sum Y:1. [exists x. !X(x) & Y(x) & "
                   "(forall y. y != x -> (Y(y) <-> X(y)))] * $Y * f(Y)")
