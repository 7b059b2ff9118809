"""Compile a small nondeterministic machine into a sentence counting its branchings.

A run is stored in one relation S of arity 3k: S(c, t, r) says that at time
t the cell c holds the symbol coded by r.  Codes are k-tuples read as
numbers in base n: 0, 1 and 2 stand for the tape symbols 0, 1 and blank,
and 3 + 3*q + b marks the head cell holding symbol b while the machine is
in the q-th state.  The input word is the unary relation B of the
structure, one bit per element, laid out on cells 0..n-1.

Only machines that never touch the work tape and never write output are
accepted.  The input tape is read-only, so the head cell keeps its symbol.
"""
from __future__ import annotations

from ..formula.ast import (TOP, Add, And, Bool, FunAppSO, Iff, LfpRel, LfpSO, Mul, Not, Or, RelApp,
                           SOApp, SOVar, SumSO, conj, disj, exists, forall, plus, times)
from ..formula.macros import Fresh, is_min, tuple_const, tuple_eq, tuple_min, tuple_succ
from ..machines import BLANK, SYMBOLS, MachineSpec, run_tree
from ..structure import RelationValue, Structure


class CompileError(ValueError):
    """The machine or the structure is outside what the compiler handles."""


def word_structure(word: str) -> Structure:
    """Structure over len(word) elements whose unary relation B holds the 1-bits."""
    if not word or any(ch not in "01" for ch in word):
        raise CompileError(f"input must be a nonempty bitstring, got {word!r}")
    return Structure(len(word), {"B": RelationValue(1, frozenset((i,) for i, ch in enumerate(word)
                                                               if ch == "1"))})


def structure_word(A: Structure) -> str:
    if "B" not in A.relations or A["B"].arity != 1:
        raise CompileError("the structure needs a unary relation B holding the input bits")
    return "".join("1" if (i,) in A["B"] else "0" for i in range(A.n))


def _sym(b: str) -> int:
    return SYMBOLS.index(b)


class _Codes:
    def __init__(self, M: MachineSpec):
        self.states = {q: i for i, q in enumerate(M.states)}

    def symbol(self, b: str) -> int:
        return _sym(b)

    def head(self, b: str, q: str) -> int:
        return 3 + 3 * self.states[q] + _sym(b)

    def size(self) -> int:
        return 3 + 3 * len(self.states)


def check_preconditions(M: MachineSpec, A: Structure, k: int):
    """Raise CompileError unless the whole computation tree fits in n^k cells and steps."""
    n = A.n
    nk = n ** k
    word = structure_word(A)
    if M.transducer:
        raise CompileError("transducers are not supported")
    for (q, a, b), actions in M.transitions.items():
        if len(actions) == 2 and actions[0] == actions[1]:
            raise CompileError(f"the two choices of {(q, a, b)} are identical")
        for act in actions:
            if b != BLANK or act.write != BLANK or act.work_move != "S":
                raise CompileError(f"transition {(q, a, b)} uses the work tape")
    if 3 + 3 * len(M.states) > nk:
        raise CompileError(f"{3 + 3 * len(M.states)} symbol codes do not fit in n^k = {nk}")
    if nk < 2:
        raise CompileError("n^k must be at least 2")
    stats = run_tree(M, word, nk - 1)
    if stats.clock_exceeded:
        raise CompileError(f"some path runs longer than n^k - 1 = {nk - 1} steps")
    if stats.max_pos >= nk:
        raise CompileError(f"the head leaves the {nk} available cells")
    if stats.clamped:
        raise CompileError("the head moves left of cell 0")
    return stats


class _Builder:
    def __init__(self, M: MachineSpec, n: int, k: int):
        self.M, self.n, self.k = M, n, k
        self.codes = _Codes(M)
        self.fresh = Fresh("_c")
        self.xs = tuple(f"x{i}" for i in range(1, k + 1))
        self.ys = tuple(f"y{i}" for i in range(1, k + 1))
        self.zs = tuple(f"z{i}" for i in range(1, k + 1))
        self.det, self.nondet = [], []
        for (q, a, _), actions in sorted(M.transitions.items()):
            if q == M.accepting:
                continue
            (self.det if len(actions) == 1 else self.nondet).append((q, a, actions))

    def vars(self):
        return self.xs + self.ys + self.zs

    def many(self):
        return self.fresh.many(self.k)

    def is_code(self, zs, code):
        return tuple_const(zs, code, self.n, self.fresh)

    def has_code(self, atom, xs, ys, code):
        ws = self.many()
        return exists(ws, And(self.is_code(ws, code), atom(xs, ys, ws)))

    def update(self, atom, q1, b1, act, guarded=False):
        """One step by transition (q1, b1) -> act, from the time before ys to ys."""
        xs, ys, zs = self.xs, self.ys, self.zs
        c, f = self.codes, self.fresh
        yp, xp = self.many(), self.many()
        head_was = lambda cell: self.has_code(atom, cell, yp, c.head(b1, q1))
        if act.input_move == "S":
            moved = And(head_was(xs), self.is_code(zs, c.head(b1, act.state)))
            others = exists(xp, conj(head_was(xp), Not(tuple_eq(xs, xp)), atom(xs, yp, zs)))
            cases = [moved, others]
        else:
            adjacent = (lambda a, b: tuple_succ(a, b, f)) if act.input_move == "R" \
                else (lambda a, b: tuple_succ(b, a, f))
            arrive = And(exists(xp, And(adjacent(xp, xs), head_was(xp))),
                         disj(*(And(self.has_code(atom, xs, yp, c.symbol(b)),
                                    self.is_code(zs, c.head(b, act.state))) for b in SYMBOLS)))
            leave = And(head_was(xs), self.is_code(zs, c.symbol(b1)))
            others = exists(xp, conj(head_was(xp), Not(tuple_eq(xs, xp)), Not(adjacent(xp, xs)),
                                     atom(xs, yp, zs)))
            cases = [arrive, leave, others]
        parts = [tuple_succ(yp, ys, f)]
        if guarded:
            # only the step right after the last recorded time
            xq, zq = self.many(), self.many()
            parts.append(Not(exists(xq + zq, atom(xq, ys, zq))))
        parts.append(disj(*cases))
        return exists(yp, conj(*parts))

    def detcomp_atom(self, X: str):
        """Atom builder for the maximal deterministic extension of the run in X."""
        P = "P"
        rel = lambda xs, ys, zs: SOApp(P, xs + ys + zs)
        steps = [self.update(rel, q, a, actions[0]) for q, a, actions in self.det]
        body = disj(SOApp(P, self.vars()), *steps, SOApp(X, self.vars()))
        params = self.vars()
        return lambda xs, ys, zs: LfpRel(P, params, body, xs + ys + zs)

    def exists_branching(self, detcomp):
        c = self.codes
        nondet_codes = [c.head(a, q) for q, a, _ in self.nondet]
        xs, ys, zs = self.xs, self.ys, self.zs
        y2, x2, z2 = self.many(), self.many(), self.many()
        last = Not(exists(y2, And(tuple_succ(ys, y2, self.fresh), exists(x2 + z2, detcomp(x2, y2, z2)))))
        return exists(self.vars(), conj(detcomp(xs, ys, zs),
                                         disj(*(self.is_code(zs, g) for g in nondet_codes)), last))

    def branch(self, X: str, Y: str, i: int, detcomp):
        xs, ys, zs = self.xs, self.ys, self.zs
        steps = [self.update(detcomp, q, a, actions[i], guarded=True) for q, a, actions in self.nondet]
        grown = disj(detcomp(xs, ys, zs), *steps)
        base = forall(self.vars(), Iff(SOApp(Y, self.vars()), Or(SOApp(X, self.vars()), grown)))
        witness = exists(self.vars(), And(Not(SOApp(X, self.vars())), SOApp(Y, self.vars())))
        return And(base, witness)

    def initial(self, X0: str):
        """X0 holds exactly the starting configuration at time min."""
        c, f = self.codes, self.fresh
        xs, ys, zs = self.xs, self.ys, self.zs
        on_tape = conj(*(is_min(x, f) for x in xs[:-1]))
        bit = RelApp("B", (xs[-1],))
        first = tuple_min(xs, f)
        q0 = self.M.initial
        config = disj(
            conj(first, bit, self.is_code(zs, c.head("1", q0))),
            conj(first, Not(bit), self.is_code(zs, c.head("0", q0))),
            conj(Not(first), on_tape, bit, self.is_code(zs, c.symbol("1"))),
            conj(Not(first), on_tape, Not(bit), self.is_code(zs, c.symbol("0"))),
            conj(Not(on_tape), self.is_code(zs, c.symbol(BLANK))))
        return forall(self.vars(), Iff(SOApp(X0, self.vars()), And(tuple_min(ys, f), config)))


def compile_tm_to_tot(M: MachineSpec, A: Structure, k: int | None = None):
    """Sentence whose count is the number of branchings of M on the word held by A.

    With k omitted the least k that satisfies the size preconditions is used.
    """
    if k is None:
        k = _least_k(M, A)
    check_preconditions(M, A, k)
    b = _Builder(M, A.n, k)
    arity = 3 * k
    detcomp = b.detcomp_atom("X")
    guard = Bool(b.exists_branching(detcomp))
    summands = []
    for i in (0, 1):
        psi = b.branch("X", "Y", i, detcomp)
        summands.append(SumSO("Y", arity, times(SOVar("X"), guard,
                                                 Add(Bool(TOP), Mul(Bool(psi), FunAppSO("f", "Y"))))))
    lfp = LfpSO("f", "X", arity, plus(*summands), "X0")
    return SumSO("X0", arity, Mul(Bool(b.initial("X0")), lfp))


def _least_k(M: MachineSpec, A: Structure, limit: int = 4) -> int:
    last = None
    for k in range(1, limit + 1):
        try:
            check_preconditions(M, A, k)
            return k
        except CompileError as exc:
            last = exc
    raise CompileError(f"no k <= {limit} fits: {last}")


__all__ = ["CompileError", "check_preconditions", "compile_tm_to_tot", "structure_word", "word_structure"]
