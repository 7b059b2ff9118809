"""Command-line entry point.

    artifact eval --structure A.struct --formula f.q [--mode set|count] [--policy strict|restricted|cap:N]
    artifact fragment --formula f.q
    artifact compile clique|sinks|is|census|dnf FILE [--out PREFIX]
    artifact compile tm --spec M.tm --input 0101 [--out PREFIX]
    artifact oracle cliques|is|dnf|census|sinks FILE
    artifact oracle branchings M.tm --input 0101 --clock N
    artifact tm run --spec M.tm --input 0101 --clock N --count acc|tot|span
    artifact selftest [--suite NAME] [--seed S] [--cases N]

Exit status is 0 on success, 2 when a fixed point diverges and 1 on errors.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field

from .compilers import (CompileError, SpecError, compile_dnf, compile_tm_to_tot, oracle_count,
                        parse_dnf, parse_graph, parse_nfa, template_census, template_clique,
                        template_is, template_sinks, word_structure)
from .expl import INFINITE
from .fixpoint import Diverged, FixpointEngine, parse_policy
from .formula.ast import FormulaError
from .formula.fragments import classify_fragment, lfp_nodes
from .formula.parser import parse_qformula
from .formula.printer import to_text
from .machines import MachineError, acc_count, parse_machine, span_count, tot_count
from .selftest import SUITES, run_suites
from .structure import GuardExceeded, StructureError, format_string, parse_structure

EXIT_OK, EXIT_ERROR, EXIT_DIVERGED = 0, 1, 2

ERRORS = (FormulaError, StructureError, SpecError, MachineError, CompileError, GuardExceeded,
          OSError, ValueError, RecursionError)


@dataclass
class RunReport:
    """Outcome of one command; everything but wall_time is a function of the inputs and flags."""
    mode: str
    inputs: dict = field(default_factory=dict)
    fragment: str | None = None
    result: object = None
    iterations: int = 0
    wall_time: float = 0.0
    lfps: list = field(default_factory=list)

    def text(self) -> str:
        lines = [f"mode: {self.mode}"]
        lines += [f"{name}: {digest}" for name, digest in self.inputs.items()]
        if self.fragment is not None:
            lines.append(f"fragment: {self.fragment}")
        for tag, iters in self.lfps:
            lines.append(f"lfp {tag}: {iters} iters")
        if isinstance(self.result, dict):
            lines.append(f"diverged after {self.result['diverged']} iters")
        else:
            if isinstance(self.result, list):
                lines.append("set:")
                lines += [f"  {s}" for s in self.result]
                lines.append(f"count: {len(self.result)}")
            else:
                lines.append(f"count: {self.result}")
        return "\n".join(lines)

    def json(self) -> str:
        return json.dumps({"mode": self.mode, "inputs": self.inputs, "fragment": self.fragment,
                           "result": self.result, "iterations": self.iterations,
                           "lfps": [list(x) for x in self.lfps], "wall_time": self.wall_time},
                          sort_keys=True)


def _read(path: str) -> tuple[str, str]:
    with open(path, "rb") as fh:
        data = fh.read()
    return data.decode("utf-8"), hashlib.sha256(data).hexdigest()[:16]


def _emit(report: RunReport, as_json: bool):
    print(report.json() if as_json else report.text())


def _trace(line: str):
    print(line, file=sys.stderr)


# ---------------------------------------------------------------- commands

def cmd_eval(args) -> int:
    start = time.perf_counter()
    s_text, s_hash = _read(args.structure)
    f_text, f_hash = _read(args.formula)
    A = parse_structure(s_text)
    alpha = parse_qformula(f_text, sentence=True)
    nodes = lfp_nodes(alpha)
    tag = classify_fragment(nodes[0] if nodes else alpha)
    report = RunReport(args.mode, {"structure": s_hash, "formula": f_hash}, str(tag))
    policy = parse_policy(args.policy, args.max_iter)
    engine = FixpointEngine(A, policy, trace=_trace if args.trace_iters else None)
    code = EXIT_OK
    try:
        value = engine.evaluate(alpha)
        if value is INFINITE:
            report.result = "inf"
        elif args.mode == "set":
            report.result = sorted(format_string(s) for s in value)
        else:
            report.result = len(value)
    except Diverged as exc:
        report.result = {"diverged": exc.iterations}
        code = EXIT_DIVERGED
    report.lfps = [(str(r.tag), r.iterations) for r in engine.runs]
    report.iterations = sum(r.iterations for r in engine.runs)
    report.wall_time = round(time.perf_counter() - start, 6)
    _emit(report, args.json)
    return code


def cmd_fragment(args) -> int:
    text, _ = _read(args.formula)
    alpha = parse_qformula(text, sentence=True)
    print(classify_fragment(alpha))
    for node in lfp_nodes(alpha):
        print(f"lfp {node.fun}: {classify_fragment(node)}")
    return EXIT_OK


def _compile(problem: str, args):
    if problem == "tm":
        if not args.spec or not args.input:
            raise ValueError("compile tm needs --spec and --input")
        M = parse_machine(_read(args.spec)[0])
        A = word_structure(args.input)
        return A, compile_tm_to_tot(M, A, args.k)
    if not args.file:
        raise ValueError(f"compile {problem} needs an instance file")
    text, _ = _read(args.file)
    if problem == "clique":
        return template_clique(parse_graph(text))
    if problem == "sinks":
        return template_sinks(parse_graph(text))
    if problem == "is":
        return template_is(parse_graph(text), args.variant)
    if problem == "census":
        return template_census(parse_nfa(text))
    return compile_dnf(parse_dnf(text))


def cmd_compile(args) -> int:
    A, alpha = _compile(args.problem, args)
    s_text, f_text = A.to_text(), to_text(alpha) + "\n"
    if args.out:
        with open(args.out + ".struct", "w", encoding="utf-8") as fh:
            fh.write(s_text)
        with open(args.out + ".formula", "w", encoding="utf-8") as fh:
            fh.write(f_text)
        print(f"wrote {args.out}.struct and {args.out}.formula")
    else:
        sys.stdout.write(s_text + "---\n" + f_text)
    return EXIT_OK


_PARSERS = {"cliques": parse_graph, "is": parse_graph, "sinks": parse_graph,
            "dnf": parse_dnf, "census": parse_nfa}
_ALIASES = {"clique": "cliques"}


def cmd_oracle(args) -> int:
    problem = _ALIASES.get(args.problem, args.problem)
    text, _ = _read(args.file)
    if problem == "branchings":
        if args.input is None or args.clock is None:
            raise ValueError("oracle branchings needs --input and --clock")
        n = oracle_count(problem, parse_machine(text), args.input, args.clock)
    else:
        n = oracle_count(problem, _PARSERS[problem](text))
    print(f"count: {n}")
    return EXIT_OK


_COUNTS = {"acc": acc_count, "tot": tot_count, "span": span_count}


def cmd_tm(args) -> int:
    M = parse_machine(_read(args.spec)[0])
    print(f"count: {_COUNTS[args.count](M, args.input, args.clock)}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    names = None
    if args.suite:
        names = [s for part in args.suite for s in part.split(",") if s]
        unknown = [s for s in names if s not in SUITES]
        if unknown:
            raise ValueError(f"unknown suite {unknown[0]!r}; choose from {', '.join(SUITES)}")
    results = run_suites(names, args.seed, args.cases)
    for res in results:
        print(res.line())
        for msg in res.failures:
            print(f"  {msg}")
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} suites passed (seed {args.seed})")
    return EXIT_OK if not failed else EXIT_ERROR


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artifact", description="Count with quantitative second-order logic.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a sentence on a structure")
    e.add_argument("--structure", required=True)
    e.add_argument("--formula", required=True)
    e.add_argument("--mode", choices=("set", "count"), default="count")
    e.add_argument("--policy", default=None, help="strict, restricted or cap:N (default: per fragment)")
    e.add_argument("--max-iter", type=int, default=None)
    e.add_argument("--trace-iters", action="store_true", help="print per-iteration support sizes to stderr")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_eval)

    f = sub.add_parser("fragment", help="print the fragment tags of a sentence")
    f.add_argument("--formula", required=True)
    f.set_defaults(func=cmd_fragment)

    c = sub.add_parser("compile", help="emit a structure and sentence for a problem instance")
    c.add_argument("problem", choices=("clique", "sinks", "is", "census", "dnf", "tm"))
    c.add_argument("file", nargs="?")
    c.add_argument("--variant", choices=("lfp", "fo"), default="lfp")
    c.add_argument("--spec")
    c.add_argument("--input")
    c.add_argument("--k", type=int, default=None)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compile)

    o = sub.add_parser("oracle", help="brute-force count for a problem instance")
    o.add_argument("problem", choices=("clique", "cliques", "is", "dnf", "census", "sinks", "branchings"))
    o.add_argument("file")
    o.add_argument("--input")
    o.add_argument("--clock", type=int)
    o.set_defaults(func=cmd_oracle)

    t = sub.add_parser("tm", help="simulate a machine")
    tsub = t.add_subparsers(dest="action", required=True)
    r = tsub.add_parser("run")
    r.add_argument("--spec", required=True)
    r.add_argument("--input", required=True)
    r.add_argument("--clock", type=int, required=True)
    r.add_argument("--count", choices=tuple(_COUNTS), default="acc")
    r.set_defaults(func=cmd_tm)

    s = sub.add_parser("selftest", help="run the seeded oracle and property suites")
    s.add_argument("--suite", action="append", help=f"one of {', '.join(SUITES)}; repeatable")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cases", type=int, default=None, help="cases per suite (default: per suite)")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
