"""Seeded oracle-equivalence and property suites.

Each suite takes a random.Random and a case budget and returns a
SuiteResult.  The same generators back the test suite, so a failing case
can be reproduced from its seed and index alone.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .boolsem import Assignment, BoolEvaluator, EMPTY_ASSIGNMENT, eval_bool
from .compilers import (DnfSpec, GraphSpec, NfaSpec, compile_dnf, compile_tm_to_tot, count_census,
                        count_cliques, count_dnf, count_independent_sets, count_sinks, template_census,
                        template_clique, template_is, template_sinks, word_structure)
from .expl import EPSILON_SET, INFINITE, Evaluator, FunTable, concat_sets, union
from .fixpoint import Capped, Diverged, FixpointEngine, detect_infinite
from .fixtures import INFINITE_BODY, ZETA_BODY, lfp_so, toy_machine
from .formula.ast import (TOP, Add, And, Bool, Eq, ExistsFO, FOVar, ForallFO, FunAppFO, Iff, Leq,
                          Mul, Not, Or, RelApp, SOApp, SOVar, SumFO, SumSO)
from .formula.fragments import TOTP_TAGS
from .machines import tot_count
from .structure import RelationValue, Structure, all_tuples, enumerate_relations


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failures: list = field(default_factory=list)
    length_checks: int = 0           # values checked against the syntactic length bound
    rounds: list = field(default_factory=list)   # (iterations, n^k + 1) per TotP lfp run

    @property
    def total(self) -> int:
        return self.passed + len(self.failures)

    @property
    def ok(self) -> bool:
        return not self.failures

    def check(self, cond: bool, message: str):
        if cond:
            self.passed += 1
        else:
            self.failures.append(message)

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        return f"{self.name}: {self.passed}/{self.total} {status}"


# ---------------------------------------------------------------- generators

def random_relation(rng: random.Random, n: int, k: int, p: float = 0.5) -> RelationValue:
    return RelationValue(k, frozenset(t for t in all_tuples(n, k) if rng.random() < p))


def random_graph(rng: random.Random, n: int, p: float = 0.5, loops: bool = False,
                 source: bool = False) -> GraphSpec:
    edges = frozenset((u, v) for u in range(n) for v in range(n)
                      if (loops or u != v) and rng.random() < p)
    return GraphSpec(n, edges, rng.randrange(n) if source else None)


def all_graphs_3():
    """The 64 loop-free directed graphs on three vertices."""
    pairs = [(u, v) for u in range(3) for v in range(3) if u != v]
    for bits in range(1 << len(pairs)):
        yield GraphSpec(3, frozenset(p for i, p in enumerate(pairs) if bits >> i & 1))


def random_dnf(rng: random.Random, max_vars: int = 4, max_clauses: int = 3) -> DnfSpec:
    v = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        chosen = rng.sample(range(1, v + 1), rng.randint(1, v))
        lits = [x if rng.random() < 0.5 else -x for x in chosen]
        if rng.random() < 0.15:
            lits.append(-lits[0])        # unsatisfiable clause
        clauses.append(tuple(sorted(lits, key=abs)))
    return DnfSpec(v, tuple(clauses))


def random_nfa(rng: random.Random, max_states: int = 4, max_length: int = 4) -> NfaSpec:
    s = rng.randint(1, max_states)
    edges = frozenset((p, q, a) for p in range(s) for q in range(s) for a in (0, 1)
                      if rng.random() < 0.3)
    accepting = frozenset(q for q in range(s) if rng.random() < 0.4)
    return NfaSpec(s, edges, rng.randrange(s), accepting, rng.randint(1, max_length))


# "0" is read along 0 -> 1 and 0 -> 2, "01" along both branches as well
DUPLICATE_PATH_NFA = NfaSpec(4, frozenset({(0, 1, 0), (0, 2, 0), (1, 3, 1), (2, 3, 1)}), 0,
                             frozenset({1, 2, 3}), 3)

FIGURE3_DNF = DnfSpec(3, ((1, 3), (-2, 3)))

C4 = GraphSpec(4, frozenset({(0, 1), (1, 2), (2, 3), (3, 0)}))


# --------------------------------------------------------------- evaluation

def counted(A: Structure, alpha, res: SuiteResult | None = None, policy=None):
    """Count alpha with the length bound checked inline; returns (count, engine)."""
    engine = FixpointEngine(A, policy, check_lengths=True)
    value = engine.count(alpha)
    if res is not None:
        res.length_checks += engine.evaluator.length_checks
    return value, engine


def strict_chain_ok(engine: FixpointEngine, n: int, res: SuiteResult | None = None) -> bool:
    """Every TotP-fragment lfp settled within n^k + 1 rounds."""
    runs = [r for r in engine.runs if r.tag in TOTP_TAGS]
    if res is not None:
        res.rounds += [(r.iterations, n ** r.node.arity + 1) for r in runs]
    return bool(runs) and all(r.iterations <= n ** r.node.arity + 1 for r in runs)


# ------------------------------------------------------------------- suites

def suite_table2(rng: random.Random, cases: int) -> SuiteResult:
    """The seven semantic rows on a two-element structure, plus the worked concatenation."""
    res = SuiteResult("table2")
    A = Structure(2, {"R": RelationValue(1, frozenset({(1,)}))})
    ev = Evaluator(A, check_lengths=True)
    B = RelationValue(1, frozenset({(0,)}))
    asg = Assignment({"x": 1}, {"X": B})
    res.check(ev.expl(Bool(RelApp("R", ("x",))), asg) == EPSILON_SET, "Bool true")
    res.check(ev.expl(Bool(Not(RelApp("R", ("x",)))), asg) == frozenset(), "Bool false")
    res.check(ev.expl(FOVar("x"), asg) == {(1,)}, "FO variable")
    res.check(ev.expl(SOVar("X"), asg) == {(B,)}, "SO variable")
    res.check(ev.expl(Add(FOVar("x"), Bool(TOP)), asg) == {(1,), ()}, "sum")
    res.check(ev.expl(Mul(FOVar("x"), FOVar("x")), asg) == {(1, 1)}, "product")
    res.check(ev.expl(SumFO("y", FOVar("y")), asg) == {(0,), (1,)}, "first-order sum")
    rels = list(enumerate_relations(2, 1))
    res.check(ev.expl(SumSO("Y", 1, SOVar("Y")), asg) == {(r,) for r in rels}, "second-order sum")
    h = FunTable("fo", 1, {(1,): frozenset({(0, 0)})})
    res.check(ev.expl(FunAppFO("f", ("x",)), asg, {"f": h}) == {(0, 0)}, "function lookup")
    a1, a2, a3 = "a1", "a2", "a3"
    s1 = frozenset({(), (a1,), (a2, a3)})
    s2 = frozenset({(), (a2, a3)})
    want = {(), (a2, a3), (a1,), (a1, a2, a3), (a2, a3, a2, a3)}
    res.check(concat_sets(s1, s2) == want, "worked concatenation")
    res.length_checks += ev.length_checks
    res.check(concat_sets(s1, frozenset()) == frozenset(), "empty annihilates")
    res.check(concat_sets(INFINITE, frozenset()) == frozenset(), "empty annihilates infinite")
    res.check(union(s1, INFINITE) is INFINITE, "infinite is sticky")
    return res


def suite_clique(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("clique")
    graphs = list(all_graphs_3())
    graphs += [random_graph(rng, rng.randint(1, 5)) for _ in range(cases)]
    for i, g in enumerate(graphs):
        A, alpha = template_clique(g)
        got, _ = counted(A, alpha, res)
        res.check(got == count_cliques(g), f"case {i}: {got} != {count_cliques(g)} on {sorted(g.edges)}")
    return res


def suite_is(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("is")
    graphs = [C4] + [random_graph(rng, rng.randint(1, 6), p=0.4) for _ in range(cases)]
    for i, g in enumerate(graphs):
        want = count_independent_sets(g)
        for variant in ("lfp", "fo"):
            A, alpha = template_is(g, variant)
            got, engine = counted(A, alpha, res)
            res.check(got == want and strict_chain_ok(engine, A.n, res),
                      f"case {i} ({variant}): {got} != {want} on n={g.n} {sorted(g.edges)}")
    return res


def suite_dnf(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("dnf")
    instances = [FIGURE3_DNF] + [random_dnf(rng) for _ in range(cases)]
    for i, d in enumerate(instances):
        A, alpha = compile_dnf(d)
        got, engine = counted(A, alpha, res)
        want = count_dnf(d)
        res.check(got == want and strict_chain_ok(engine, A.n, res),
                  f"case {i}: {got} != {want} on {d.variables} vars {d.clauses}")
    return res


def suite_census(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("census")
    nfas = [DUPLICATE_PATH_NFA] + [random_nfa(rng) for _ in range(max(cases - 1, 0))]
    for i, a in enumerate(nfas):
        A, alpha = template_census(a)
        got, _ = counted(A, alpha, res)
        want = count_census(a)
        res.check(got == want, f"case {i}: {got} != {want} on {a}")
    return res


def suite_sinks(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("sinks")
    for i in range(cases):
        g = random_graph(rng, rng.randint(1, 6), p=0.3, loops=True, source=True)
        A, alpha = template_sinks(g)
        got, _ = counted(A, alpha, res)
        want = count_sinks(g)
        res.check(got == want, f"case {i}: {got} != {want} on {g}")
    return res


# pools for random restricted recursions alpha + Sum Y. [phi] * $Y * f(Y)
DETECTOR_PHI = ("Y == X", "forall x. X(x) -> Y(x)", "exists x. Y(x) & !X(x)",
                "forall x. Y(x) <-> !X(x)", "Y(min)", "forall x. !Y(x)", "exists x. X(x) & !Y(x)")
DETECTOR_ALPHA = ("[X(min)]", "[exists x. X(x)]", "$X", "[forall x. !X(x)] * $X", None)
STRICT_EXTEND_BODY = ("[X(min)] + Sum Y:1. [(forall x. Y(x) <-> X(x) | x = max) & "
                      "(exists x. !X(x) & Y(x))] * $Y * f(Y)")


def random_detector_body(rng: random.Random) -> str:
    phi = " & ".join(f"({p})" for p in rng.sample(DETECTOR_PHI, rng.randint(1, 2)))
    recursion = f"(Sum Y:1. [{phi}] * $Y * f(Y))"
    alpha = rng.choice(DETECTOR_ALPHA)
    return recursion if alpha is None else f"{recursion} + {alpha}"


def capped_verdict(lfp, A: Structure, asg: Assignment, cap: int = 200, budget: int = 200) -> bool:
    """True when plain iteration runs past cap rounds or past budget strings.

    A finite answer on two elements holds far fewer than 200 strings, so
    the budget only cuts short recursions that grow without bound.
    """
    try:
        FixpointEngine(A, Capped(cap, budget)).count(lfp, asg)
    except Diverged:
        return True
    return False


def suite_detector(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("detector")
    A1 = Structure(1, {})
    B1 = RelationValue(1, frozenset({(0,)}))
    at = lambda B: Assignment({}, {"X0": B})
    res.check(detect_infinite(lfp_so(INFINITE_BODY), A1, at(B1)), "infinite example")
    res.check(not detect_infinite(lfp_so(ZETA_BODY), A1, at(B1)), "zeta")
    for n in (1, 2, 3):
        A = Structure(n, {})
        for B in enumerate_relations(n, 1):
            res.check(not detect_infinite(lfp_so(STRICT_EXTEND_BODY), A, at(B)),
                      f"strict extend n={n} {B}")
    for i in range(cases):
        n = rng.randint(1, 2)
        A = Structure(n, {})
        body = random_detector_body(rng)
        lfp = lfp_so(body)
        asg = at(random_relation(rng, n, 1))
        verdict = detect_infinite(lfp, A, asg)
        res.check(verdict == capped_verdict(lfp, A, asg),
                  f"case {i}: detector says {verdict} on n={n} {body} from {asg.so['X0']}")
    return res


def _random_beta(rng: random.Random, bound: tuple, depth: int):
    """Lfp-free formula over R(1), E(2) with one unary function symbol f."""
    if depth == 0 or rng.random() < 0.25:
        x = rng.choice(bound)
        y = rng.choice(bound)
        return rng.choice([
            lambda: FOVar(x),
            lambda: FunAppFO("f", (x,)),
            lambda: Bool(RelApp("R", (x,))),
            lambda: Bool(Not(RelApp("E", (x, y)))),
            lambda: Bool(Leq(x, y)),
            lambda: Bool(TOP),
        ])()
    kind = rng.choice(("add", "mul", "sum"))
    if kind == "sum":
        v = f"v{len(bound)}"
        return SumFO(v, _random_beta(rng, bound + (v,), depth - 1))
    left = _random_beta(rng, bound, depth - 1)
    right = _random_beta(rng, bound, depth - 1)
    return Add(left, right) if kind == "add" else Mul(left, right)


def _random_strings(rng: random.Random, n: int):
    return frozenset(tuple(rng.randrange(n) for _ in range(rng.randint(0, 2)))
                     for _ in range(rng.randint(0, 2)))


def random_table_pair(rng: random.Random, n: int):
    """Tables h <= g for a unary function symbol."""
    h, g = FunTable("fo", 1), FunTable("fo", 1)
    for a in range(n):
        small = _random_strings(rng, n)
        h[(a,)] = small
        g[(a,)] = INFINITE if rng.random() < 0.1 else small | _random_strings(rng, n)
    return h, g


def subset_of(s1, s2) -> bool:
    if s2 is INFINITE:
        return True
    return s1 is not INFINITE and s1 <= s2


def suite_monotonicity(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("monotonicity")
    for i in range(cases):
        n = rng.randint(1, 3)
        A = Structure(n, {"R": random_relation(rng, n, 1), "E": random_relation(rng, n, 2)})
        beta = _random_beta(rng, ("x",), rng.randint(1, 3))
        h, g = random_table_pair(rng, n)
        ev = Evaluator(A)
        ok = True
        for a in range(n):
            asg = Assignment({"x": a})
            ok &= subset_of(ev.expl(beta, asg, {"f": h}), ev.expl(beta, asg, {"f": g}))
        res.check(ok, f"case {i}: {beta}")
    return res


def _random_chi(rng: random.Random, ys: tuple, depth: int, source: str | None):
    if depth == 0 or rng.random() < 0.3:
        a, b = rng.choice(ys), rng.choice(ys)
        atoms = [RelApp("R", (a,)), RelApp("E", (a, b)), Eq(a, b), Leq(a, b),
                 ExistsFO("w", RelApp("E", (a, "w")))]
        if source is not None:
            atoms.append(SOApp(source, tuple(rng.choice(ys) for _ in ys)))
        return rng.choice(atoms)
    kind = rng.choice(("not", "and", "or"))
    if kind == "not":
        return Not(_random_chi(rng, ys, depth - 1, source))
    left, right = _random_chi(rng, ys, depth - 1, source), _random_chi(rng, ys, depth - 1, source)
    return And(left, right) if kind == "and" else Or(left, right)


def _forall(ys, body):
    for y in reversed(ys):
        body = ForallFO(y, body)
    return body


def random_fastpath_case(rng: random.Random):
    """(kind, structure, formula, assignment) for a define or extend formula on Y."""
    n, k = rng.randint(1, 3), rng.randint(1, 2)
    ys = tuple(f"y{i}" for i in range(1, k + 1))
    A = Structure(n, {"R": random_relation(rng, n, 1), "E": random_relation(rng, n, 2)})
    Y = SOApp("Y", ys)
    if rng.random() < 0.5:
        phi = _forall(ys, Iff(Y, _random_chi(rng, ys, 2, None)))
        return "define", A, phi, EMPTY_ASSIGNMENT
    phi = _forall(ys, Iff(Y, Or(SOApp("X", ys), _random_chi(rng, ys, 2, "X"))))
    if rng.random() < 0.5:
        zs = tuple(f"z{i}" for i in range(1, k + 1))
        witness = And(Not(SOApp("X", zs)), SOApp("Y", zs))
        for z in reversed(zs):
            witness = ExistsFO(z, witness)
        phi = And(phi, witness)
    return "extend", A, phi, Assignment({}, {"X": random_relation(rng, n, k, 0.4)})


def solutions(phi, A: Structure, asg: Assignment, k: int) -> list:
    return [C for C in enumerate_relations(A.n, k) if eval_bool(phi, A, asg.bind_so("Y", C))]


def suite_fastpath(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("fastpath")
    for i in range(cases):
        kind, A, phi, asg = random_fastpath_case(rng)
        k = len(_strip(phi))
        ev = BoolEvaluator(A)
        got = ev.unique_define(phi, asg) if kind == "define" else ev.unique_extend(phi, asg)
        want = solutions(phi, A, asg, k)
        res.check(len(want) <= 1 and (got is None) == (not want) and (got is None or got == want[0]),
                  f"case {i} ({kind}): fast path {got}, enumeration {want}")
    return res


def _strip(phi):
    if isinstance(phi, And):
        phi = phi.left
    ys = []
    while isinstance(phi, ForallFO):
        ys.append(phi.var)
        phi = phi.body
    return ys


def suite_machines(rng: random.Random, cases: int) -> SuiteResult:
    res = SuiteResult("machines")
    for name in ("m0", "m1", "m2"):
        M, word = toy_machine(name)
        A = word_structure(word)
        got, _ = counted(A, compile_tm_to_tot(M, A), res)
        want = tot_count(M, word, len(word) ** 2)
        res.check(got == want, f"{name} on {word}: {got} != {want}")
    M, _ = toy_machine("m2")
    for word in ("1", "11", "111", "0110"):
        A = word_structure(word)
        try:
            alpha = compile_tm_to_tot(M, A)
        except ValueError:
            continue
        got, _ = counted(A, alpha, res)
        want = tot_count(M, word, len(word) ** 4)
        res.check(got == want, f"m2 on {word}: {got} != {want}")
    return res


SUITES = {
    "table2": (suite_table2, 1),
    "clique": (suite_clique, 50),
    "is": (suite_is, 30),
    "dnf": (suite_dnf, 30),
    "census": (suite_census, 20),
    "sinks": (suite_sinks, 30),
    "detector": (suite_detector, 100),
    "monotonicity": (suite_monotonicity, 200),
    "fastpath": (suite_fastpath, 100),
    "machines": (suite_machines, 1),
}


def run_suites(names=None, seed: int = 0, cases: int | None = None) -> list[SuiteResult]:
    """Run the named suites (all by default); cases overrides each suite's default budget.

    Every suite gets its own generator seeded from (seed, name), so the case
    set of one suite does not depend on which others run.
    """
    out = []
    for name in names or SUITES:
        fn, default = SUITES[name]
        rng = random.Random(f"{seed}:{name}")
        out.append(fn(rng, default if cases is None else cases))
    return out


__all__ = ["C4", "DUPLICATE_PATH_NFA", "FIGURE3_DNF", "SUITES", "SuiteResult", "all_graphs_3",
           "capped_verdict", "counted", "random_detector_body", "random_dnf", "random_fastpath_case",
           "random_graph", "random_nfa", "random_relation", "random_table_pair", "run_suites",
           "solutions", "strict_chain_ok", "subset_of"]
