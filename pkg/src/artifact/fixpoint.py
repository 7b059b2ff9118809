"""Least fixed points of recursion bodies over function tables.

Starting from the everywhere-empty table, the body is applied to every
argument of the table's domain until two consecutive tables agree.  For a
first-order argument the domain is all of A^k.  For a relation argument it
is the set of relations reachable from the requested argument through the
body's own lookups, found by a discovery pass.

How long to iterate depends on the fragment of the lfp node:

* StrictChain  every recursive call strictly extends its argument, so the
               chain must settle within n^k + 1 rounds.
* RestrictedSO the infinity detector runs first; a finite answer is then
               reached by plain iteration.
* Capped       iterate up to a cap and raise Diverged past it.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .boolsem import Assignment, EMPTY_ASSIGNMENT
from .expl import (EMPTY, INFINITE, Evaluator, FunTable, StringBudgetExceeded, _conjunct_shapes,
                   cardinality)
from .formula.ast import FormulaError, LfpFO, LfpSO, free_fo, free_so
from .formula.fragments import (TOTP_TAGS, FragmentTag, classify_fragment, match_connection_shape)
from .structure import GuardExceeded, RelationValue, Structure, all_tuples, check_guard, \
    enumerate_relations

DEFAULT_MAX_STRINGS = 200_000
MAX_DOMAIN = 100_000


class Diverged(RuntimeError):
    def __init__(self, iterations: int, reason: str = ""):
        self.iterations = iterations
        super().__init__(f"diverged after {iterations} iters" + (f" ({reason})" if reason else ""))


@dataclass(frozen=True)
class StrictChain:
    pass


@dataclass(frozen=True)
class RestrictedSO:
    pass


@dataclass(frozen=True)
class Capped:
    max_iter: int | None = None              # None: 10 * n^k + 64
    max_strings: int = DEFAULT_MAX_STRINGS

    def __post_init__(self):
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


LfpPolicy = StrictChain | RestrictedSO | Capped


def parse_policy(text: str | None, max_iter: int | None = None) -> LfpPolicy | None:
    """'strict', 'restricted', 'cap:N' or 'auto' (None: choose per lfp node)."""
    if text is None or text == "auto":
        return Capped(max_iter) if max_iter is not None else None
    if text == "strict":
        return StrictChain()
    if text == "restricted":
        return RestrictedSO()
    if text.startswith("cap:"):
        try:
            return Capped(int(text[4:]))
        except ValueError:
            raise ValueError(f"bad cap in policy {text!r}") from None
    if text == "cap":
        return Capped(max_iter)
    raise ValueError(f"unknown policy {text!r}")


def policy_for(tag: FragmentTag) -> LfpPolicy:
    if tag in TOTP_TAGS:
        return StrictChain()
    if tag == FragmentTag.RsoR_SsoSO:
        return RestrictedSO()
    return Capped()


@dataclass
class LfpRun:
    """What happened when one lfp node was solved."""
    node: object
    tag: FragmentTag
    policy: LfpPolicy
    iterations: int = 0
    domain: int = 0
    infinite: bool = False
    trace: list = field(default_factory=list)     # (round, support size, strings held)


# ---------------------------------------------------------------- connections

class ConnectionGraph:
    """Graph on k-ary relations with an edge B -> C iff phi(X := B, Y := C) holds.

    Successors are computed on demand and memoized in `adjacency`.
    """

    def __init__(self, phi, structure: Structure, k: int, x_var: str = "X", y_var: str = "Y",
                 asg: Assignment = EMPTY_ASSIGNMENT, evaluator: Evaluator | None = None):
        self.phi = phi
        self.k = k
        self.x_var = x_var
        self.y_var = y_var
        self.asg = asg
        self.ev = evaluator or Evaluator(structure)
        self.n = structure.n
        self.adjacency: dict = {}
        self._single = self._single_candidate_shape()

    def _single_candidate_shape(self):
        for kind, shape in _conjunct_shapes(self.phi):
            if kind == "define" and shape[0] == self.y_var and len(shape[1]) == self.k:
                return kind, shape
            if kind == "extend" and shape.target == self.y_var and shape.source == self.x_var \
                    and len(shape.params) == self.k:
                return kind, shape
        return None

    def successors(self, B: RelationValue) -> frozenset:
        hit = self.adjacency.get(B)
        if hit is not None:
            return hit
        asg = self.asg.bind_so(self.x_var, B)
        if self._single is not None:
            kind, shape = self._single
            if kind == "define":
                cands = [self.ev.bools.relation_of(shape[2], shape[1], asg)]
            else:
                added = self.ev.bools.relation_of(shape.psi, shape.params, asg)
                cands = [B.union(added.tuples)]
        else:
            check_guard(self.n, self.k)
            cands = enumerate_relations(self.n, self.k)
        out = frozenset(C for C in cands if self.ev.holds(self.phi, asg.bind_so(self.y_var, C)))
        self.adjacency[B] = out
        return out

    def reachable(self, B: RelationValue) -> set:
        """B together with everything reachable from it."""
        seen = {B}
        queue = deque([B])
        while queue:
            for C in self.successors(queue.popleft()):
                if C not in seen:
                    seen.add(C)
                    queue.append(C)
        return seen

    def materialize(self):
        """Compute every vertex's successors (needs the enumeration guard)."""
        check_guard(self.n, self.k)
        for B in enumerate_relations(self.n, self.k):
            self.successors(B)
        return self

    def edges(self) -> set:
        return {(B, C) for B, succ in self.adjacency.items() for C in succ}


def build_connection_graph(phi, A: Structure, k: int, x_var: str = "X", y_var: str = "Y",
                           asg: Assignment = EMPTY_ASSIGNMENT, root: RelationValue | None = None
                           ) -> ConnectionGraph:
    """Connection graph of phi; the full graph, or only what is reachable from root."""
    G = ConnectionGraph(phi, A, k, x_var, y_var, asg)
    if root is None:
        return G.materialize()
    G.reachable(root)
    return G


def reach(G: ConnectionGraph, B: RelationValue, C: RelationValue) -> bool:
    """Whether C is B or reachable from B."""
    return C in G.reachable(B)


def _on_cycle(G: ConnectionGraph, C: RelationValue) -> bool:
    return any(C in G.reachable(D) for D in G.successors(C))


def detect_infinite(lfp: LfpSO, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT,
                    evaluator: Evaluator | None = None) -> bool:
    """Whether the lfp of a restricted second-order recursion yields infinitely many strings.

    That happens exactly when some C reachable from the argument lies on a
    nonempty cycle and some D reachable from C has a nonempty base value:
    the cycle can be pumped and the recursion can still stop at D.
    """
    shape = match_connection_shape(lfp)
    if shape is None:
        raise FormulaError("lfp body is not of the form alpha + Sum Y. phi(X, _Y_) * f(Y)")
    if shape.var is None or shape.alpha is None:
        return False
    ev = evaluator or Evaluator(A)
    if lfp.arg not in asg.so:
        raise FormulaError(f"unbound relation variable {lfp.arg}")
    G = ConnectionGraph(shape.phi, A, lfp.arity, lfp.param, shape.var, asg, ev)
    start = asg.so[lfp.arg]
    base_ok: dict = {}

    def base_nonempty(D):
        if D not in base_ok:
            base_ok[D] = bool(ev.expl(shape.alpha, asg.bind_so(lfp.param, D), {}))
        return base_ok[D]

    for C in G.reachable(start):
        if _on_cycle(G, C) and any(base_nonempty(D) for D in G.reachable(C)):
            return True
    return False


# ---------------------------------------------------------------- the engine

def _support(table: FunTable) -> tuple:
    size = 0
    strings = 0
    for value in table.entries.values():
        if value:
            size += 1
            strings += 0 if value is INFINITE else len(value)
    return size, strings


class FixpointEngine:
    """Evaluates quantitative formulae whose lfp nodes are solved by iteration.

    policy None selects a policy per lfp node from its fragment tag.  trace,
    when given, is called with one line of text per iteration round.
    """

    def __init__(self, structure: Structure, policy: LfpPolicy | None = None, trace=None,
                 check_lengths: bool = False):
        self.A = structure
        self.n = structure.n
        self.policy = policy
        self.trace = trace
        self.evaluator = Evaluator(structure, lfp_handler=self._handle, check_lengths=check_lengths)
        self.runs: list[LfpRun] = []
        self._solved: dict = {}
        self._tags: dict = {}

    def evaluate(self, q, asg: Assignment = EMPTY_ASSIGNMENT, F: dict | None = None):
        return self.evaluator.expl(q, asg, F)

    def count(self, q, asg: Assignment = EMPTY_ASSIGNMENT, F: dict | None = None):
        return cardinality(self.evaluate(q, asg, F))

    # ------------------------------------------------------------------ helpers
    def tag_of(self, node) -> FragmentTag:
        tag = self._tags.get(id(node))
        if tag is None:
            tag = classify_fragment(node)
            self._tags[id(node)] = (node, tag)
            return tag
        return tag[1]

    def policy_of(self, node) -> LfpPolicy:
        return self.policy if self.policy is not None else policy_for(self.tag_of(node))

    def _context_key(self, node, asg):
        if isinstance(node, LfpFO):
            fo_vars = free_fo(node.body) - set(node.params)
            so_vars = free_so(node.body)
        else:
            fo_vars = free_fo(node.body)
            so_vars = free_so(node.body) - {node.param}
        try:
            fo = tuple((v, asg.fo[v]) for v in sorted(fo_vars))
            so = tuple((v, asg.so[v]) for v in sorted(so_vars))
        except KeyError as exc:
            raise FormulaError(f"unbound variable {exc.args[0]} in lfp body") from None
        return fo, so

    def _handle(self, node, asg, ev):
        if isinstance(node, LfpFO):
            try:
                arg = tuple(asg.fo[x] for x in node.args)
            except KeyError as exc:
                raise FormulaError(f"unbound variable {exc.args[0]}") from None
            key = (id(node), self._context_key(node, asg))
        else:
            if node.arg not in asg.so:
                raise FormulaError(f"unbound relation variable {node.arg}")
            arg = asg.so[node.arg]
            if arg.arity != node.arity:
                raise FormulaError(f"lfp argument {node.arg} has arity {arg.arity}, expected {node.arity}")
            key = (id(node), self._context_key(node, asg), arg)
        hit = self._solved.get(key)
        if hit is None:
            hit = (node, self.solve(node, asg))
            self._solved[key] = hit
        table = hit[1]
        return INFINITE if table is INFINITE else table[arg]

    # ------------------------------------------------------------------ solving
    def solve(self, node, asg: Assignment):
        """Least fixed point table of node (INFINITE when the detector fires)."""
        policy = self.policy_of(node)
        run = LfpRun(node, self.tag_of(node), policy)
        self.runs.append(run)
        if isinstance(node, LfpFO):
            k = len(node.params)
            domain = all_tuples(self.n, k)
            binder = lambda a: asg.bind_fos(node.params, a)
            kind = "fo"
            h1 = None
        else:
            k = node.arity
            if isinstance(policy, RestrictedSO):
                if match_connection_shape(node) is None:
                    raise FormulaError("restricted policy needs a body alpha + Sum Y. phi(X, _Y_) * f(Y)")
                if detect_infinite(node, self.A, asg, self.evaluator):
                    run.infinite = True
                    self._emit(f"lfp {node.fun}: infinity detected")
                    return INFINITE
            binder = lambda B: asg.bind_so(node.param, B)
            kind = "so"
            domain, h1 = self._discover(node, asg, binder)
        run.domain = len(domain)
        try:
            return self._iterate(run, policy, node, k, kind, domain, binder, h1)
        except Diverged as exc:
            run.iterations = exc.iterations
            raise

    def _iterate(self, run, policy, node, k, kind, domain, binder, h1):
        bound = self._bound(policy, k, len(domain))
        h = FunTable(kind, k)
        i = 0
        while True:
            if i == 0 and h1 is not None:
                new = h1
            else:
                new = self._capped_step(policy, i, node, domain, binder, h)
            if not h <= new:
                raise AssertionError("fixed-point iterates are not increasing")
            size, strings = _support(new)
            run.trace.append((i + 1, size, strings))
            self._emit(f"lfp {node.fun} iter {i + 1}: support {size}, strings {strings}")
            if new == h:
                break
            h = new
            i += 1
            if isinstance(policy, StrictChain) and i > bound:
                raise Diverged(i, f"strict chain exceeded {bound} iterations")
            if isinstance(policy, Capped):
                if i > bound:
                    raise Diverged(i)
                if strings > policy.max_strings:
                    raise Diverged(i, f"more than {policy.max_strings} strings")
            if isinstance(policy, RestrictedSO) and i > bound:
                raise AssertionError("finite restricted recursion failed to settle")
        run.iterations = i
        return h

    def _bound(self, policy, k, domain_size):
        nk = self.n ** k
        if isinstance(policy, StrictChain):
            return nk + 1
        if isinstance(policy, RestrictedSO):
            return domain_size + 1
        return policy.max_iter if policy.max_iter is not None else 10 * nk + 64

    def _capped_step(self, policy, i, node, domain, binder, h):
        """One round; under a cap a single oversized product counts as divergence."""
        if not isinstance(policy, Capped):
            return self._step(node, domain, binder, h)
        saved = self.evaluator.max_strings
        self.evaluator.max_strings = policy.max_strings
        try:
            return self._step(node, domain, binder, h)
        except StringBudgetExceeded as exc:
            raise Diverged(i + 1, str(exc)) from None
        finally:
            self.evaluator.max_strings = saved

    def _step(self, node, domain, binder, h):
        new = FunTable(h.kind, h.arity)
        fun = node.fun
        for a in domain:
            value = self.evaluator.expl(node.body, binder(a), {fun: h})
            if value:
                new.entries[a] = value
        return new

    def _discover(self, node, asg, binder):
        """Close the argument under the body's lookups; also returns the first iterate."""
        start = asg.so[node.arg]
        h1 = FunTable("so", node.arity)
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            B = queue.popleft()
            probe = FunTable("so", node.arity)
            probe.looked_up = set()
            value = self.evaluator.expl(node.body, binder(B), {node.fun: probe})
            if value:
                h1.entries[B] = value
            for C in probe.looked_up:
                if C not in seen:
                    if len(seen) >= MAX_DOMAIN:
                        raise GuardExceeded(f"lfp {node.fun} reaches more than {MAX_DOMAIN} arguments")
                    seen.add(C)
                    order.append(C)
                    queue.append(C)
        return order, h1

    def _emit(self, line: str):
        if self.trace is not None:
            self.trace(line)


# ---------------------------------------------------------------- functional API

def lfp_eval(node, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT, policy: LfpPolicy | None = None):
    """Expl value of an lfp formula applied to its argument."""
    if not isinstance(node, (LfpFO, LfpSO)):
        raise FormulaError("lfp_eval needs an lfp node")
    return FixpointEngine(A, policy).evaluate(node, asg)


def iterate_once(node, A: Structure, asg: Assignment, h: FunTable, domain=None) -> FunTable:
    """One application of the body operator to h, pointwise over the domain.

    The domain defaults to A^k for a first-order argument and to the
    arguments reachable from the bound argument for a relation argument.
    """
    engine = FixpointEngine(A, Capped())
    if isinstance(node, LfpFO):
        binder = lambda a: asg.bind_fos(node.params, a)
        if domain is None:
            domain = all_tuples(A.n, len(node.params))
    else:
        binder = lambda B: asg.bind_so(node.param, B)
        if domain is None:
            domain, _ = engine._discover(node, asg, binder)
    return engine._step(node, domain, binder, h)


def evaluate(q, A: Structure, asg: Assignment = EMPTY_ASSIGNMENT, policy: LfpPolicy | None = None,
             trace=None, check_lengths: bool = False):
    return FixpointEngine(A, policy, trace, check_lengths).evaluate(q, asg)


__all__ = ["Capped", "ConnectionGraph", "Diverged", "EMPTY", "FixpointEngine", "LfpPolicy", "LfpRun",
           "RestrictedSO", "StrictChain", "build_connection_graph", "detect_infinite", "evaluate",
           "iterate_once", "lfp_eval", "parse_policy", "policy_for", "reach"]
