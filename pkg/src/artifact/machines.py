"""Nondeterministic Turing machines and transducers with binary branching.

A machine has a read-only input tape and one work tape, both over
{0, 1, _}, plus a write-only output tape for transducers.  run_tree walks
the whole computation tree up to a clock and reports the counting
functions: accepting paths, branchings (paths - 1) and distinct valid
outputs.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

BLANK = "_"
SYMBOLS = ("0", "1", BLANK)
MOVES = {"L": -1, "S": 0, "R": 1}


class MachineError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ClockExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Action:
    state: str
    write: str = BLANK          # work-tape symbol written
    input_move: str = "S"
    work_move: str = "S"
    output: str | None = None   # "0", "1" or None


@dataclass
class MachineSpec:
    states: tuple
    initial: str
    accepting: str
    transitions: dict            # (state, input symbol, work symbol) -> tuple of 1 or 2 Actions
    transducer: bool = False

    def __post_init__(self):
        if self.initial not in self.states:
            raise MachineError(f"initial state {self.initial} is not declared")
        if self.accepting not in self.states:
            raise MachineError(f"accepting state {self.accepting} is not declared")
        for key, actions in self.transitions.items():
            state, a, b = key
            if state not in self.states:
                raise MachineError(f"undefined state {state}")
            if a not in SYMBOLS or b not in SYMBOLS:
                raise MachineError(f"undefined symbol in {key}")
            if not 1 <= len(actions) <= 2:
                raise MachineError(f"transition {key} must have one or two actions")
            for act in actions:
                if act.state not in self.states:
                    raise MachineError(f"undefined state {act.state}")
                if act.write not in SYMBOLS:
                    raise MachineError(f"undefined symbol {act.write!r}")
                if act.input_move not in MOVES or act.work_move not in MOVES:
                    raise MachineError(f"undefined move in {key}")
                if act.output is not None and not self.transducer:
                    raise MachineError(f"output on {key} but the machine is not a transducer")
                if act.output not in (None, "0", "1"):
                    raise MachineError(f"output must be 0 or 1, got {act.output!r}")


_TRANS = re.compile(r"^trans\s+(\S+?)\s*,\s*(\S)\s*,\s*(\S)\s*->\s*(.+)$")


def _action(text: str, line: int) -> Action:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (4, 5):
        raise MachineError(f"action needs state,write,input-move,work-move[,output]: {text!r}", line)
    out = parts[4] if len(parts) == 5 else None
    if out in ("", "-"):
        out = None
    return Action(parts[0], parts[1], parts[2], parts[3], out)


def parse_machine(text: str) -> MachineSpec:
    """Parse a machine file.

    Lines: ``state q0 q1 ...``, ``init q0``, ``accept qF``, optionally
    ``transducer``, and ``trans q,a,b -> q',w,Di,Dw[,out] [| second action]``.
    ``#`` starts a comment.
    """
    states, initial, accepting, transducer = [], None, None, False
    transitions: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split()[0]
        if word == "state":
            states += line.split()[1:]
        elif word == "init":
            initial = line.split()[1]
        elif word == "accept":
            accepting = line.split()[1]
        elif word == "transducer":
            transducer = True
        elif word == "trans":
            m = _TRANS.match(line)
            if m is None:
                raise MachineError(f"malformed transition {line!r}", lineno)
            key = (m.group(1), m.group(2), m.group(3))
            if key in transitions:
                raise MachineError(f"duplicate transition for {key}", lineno)
            actions = tuple(_action(a, lineno) for a in m.group(4).split("|"))
            transitions[key] = actions
        else:
            raise MachineError(f"unknown directive {word!r}", lineno)
    if initial is None or accepting is None:
        raise MachineError("machine needs 'init' and 'accept' lines")
    return MachineSpec(tuple(states), initial, accepting, transitions, transducer)


@dataclass
class RunStats:
    accepting_paths: int = 0
    total_paths: int = 0
    branchings: int = 0
    outputs: set = field(default_factory=set)
    clock_exceeded: bool = False
    max_steps: int = 0           # longest path, in steps
    max_pos: int = 0             # rightmost input head position reached
    clamped: bool = False        # some head tried to move left of cell 0

    @property
    def rejecting_paths(self) -> int:
        return self.total_paths - self.accepting_paths

    @property
    def tot(self) -> int:
        return self.total_paths - 1

    @property
    def span(self) -> int:
        return len(self.outputs)


def run_tree(M: MachineSpec, word: str, clock: int) -> RunStats:
    """Explore the computation tree of M on word, cutting paths after clock steps.

    A path ends when it enters the accepting state, when no transition
    applies, or when the clock runs out.  Outputs are collected on
    accepting leaves only.
    """
    if clock < 1:
        raise ValueError("clock must be at least 1")
    if any(c not in "01" for c in word):
        raise MachineError(f"input must be a bitstring, got {word!r}")
    stats = RunStats()
    # (state, input head, work tape, work head, output, steps)
    stack = [(M.initial, 0, (), 0, "", 0)]
    while stack:
        state, ipos, work, wpos, out, steps = stack.pop()
        stats.max_steps = max(stats.max_steps, steps)
        stats.max_pos = max(stats.max_pos, ipos)
        if state == M.accepting:
            stats.total_paths += 1
            stats.accepting_paths += 1
            stats.outputs.add(out)
            continue
        a = word[ipos] if ipos < len(word) else BLANK
        b = work[wpos] if wpos < len(work) else BLANK
        actions = M.transitions.get((state, a, b))
        if not actions:
            stats.total_paths += 1
            continue
        if steps >= clock:
            stats.total_paths += 1
            stats.clock_exceeded = True
            continue
        if len(actions) == 2:
            stats.branchings += 1
        for act in reversed(actions):
            new_work = work
            if act.write != b:
                cells = list(work) + [BLANK] * (wpos + 1 - len(work))
                cells[wpos] = act.write
                new_work = tuple(cells)
            ni = ipos + MOVES[act.input_move]
            nw = wpos + MOVES[act.work_move]
            if ni < 0 or nw < 0:
                stats.clamped = True
            stack.append((act.state, max(ni, 0), new_work, max(nw, 0),
                          out + (act.output or ""), steps + 1))
    assert stats.total_paths - 1 == stats.branchings
    return stats


def acc_count(M: MachineSpec, word: str, clock: int) -> int:
    return run_tree(M, word, clock).accepting_paths


def tot_count(M: MachineSpec, word: str, clock: int) -> int:
    """Number of branchings, which equals the number of paths minus one."""
    stats = run_tree(M, word, clock)
    if stats.clock_exceeded:
        raise ClockExceeded(f"clock {clock} exceeded; tot is undefined on a truncated tree")
    return stats.tot


def span_count(M: MachineSpec, word: str, clock: int) -> int:
    """Number of distinct outputs on accepting paths (the empty output included)."""
    return run_tree(M, word, clock).span
