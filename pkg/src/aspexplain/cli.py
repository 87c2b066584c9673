"""Command line entry point: program + answer set + query atom in, explanation out."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .analysis import ProgramError, validate_program
from .dag import ExplanationDAG, build_dag, check_acyclic, restrict_reachable, to_dot, to_json
from .explanation import Derivation, NoAssumptionSetError, derivation_for, enumerate_assumption_sets, well_founded_derivation
from .grounding import DEFAULT_ARITH_DEPTH, GroundingError, GroundProgram, instantiate
from .parser import ParseError, parse_answer_set, parse_atom, parse_program
from .semantics import OracleCapExceeded, ThreeValued, is_answer_set, oracle_answer_sets
from .serialize import export_serialized_facts
from .syntax import Atom

FORMATS = ("dot", "json", "trace", "facts")
RECORD_DELIMITER = "---\n"

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ANSWER_SET = 2
EXIT_QUERY = 3


class CliError(Exception):
    def __init__(self, message: str, status: int):
        super().__init__(message)
        self.status = status


@dataclass
class RunConfig:
    program: Path
    query: str
    answer_set: Optional[Path] = None
    format: str = "trace"
    count: int = 1
    out: Optional[Path] = None
    trust_answer_set: bool = False
    extra_atoms: list[str] = field(default_factory=list)
    arith_depth: int = DEFAULT_ARITH_DEPTH
    oracle_cap: int = 20


@dataclass(frozen=True)
class Explanation:
    assumptions: frozenset[Atom]
    derivation: Derivation
    dag: ExplanationDAG


@dataclass(frozen=True)
class Prepared:
    ground: GroundProgram
    answer: frozenset[Atom]
    query: Atom
    wf: ThreeValued


def _ground_atom(text: str, what: str) -> Atom:
    try:
        atom = parse_atom(text)
    except ParseError as err:
        raise CliError(f"{what}: {err}", EXIT_INPUT) from err
    if not atom.is_ground:
        raise CliError(f"{what} must be ground: {atom}", EXIT_INPUT)
    return atom


def prepare(config: RunConfig) -> Prepared:
    try:
        program = parse_program(config.program.read_text(encoding="utf-8"))
        validate_program(program)
    except (ParseError, ProgramError) as err:
        raise CliError(f"{config.program}: {err}", EXIT_INPUT) from err
    query = _ground_atom(config.query, "query")
    extras = frozenset(_ground_atom(t, "extra atom") for t in config.extra_atoms)

    try:
        if config.answer_set is not None:
            try:
                answer = parse_answer_set(config.answer_set.read_text(encoding="utf-8"), program)
            except ParseError as err:
                raise CliError(f"{config.answer_set}: {err}", EXIT_INPUT) from err
        else:
            probe = instantiate(program, extras | {query}, arith_depth=config.arith_depth)
            try:
                found = oracle_answer_sets(probe, cap=config.oracle_cap)
            except OracleCapExceeded as err:
                raise CliError(f"cannot compute an answer set: {err}", EXIT_ANSWER_SET) from err
            if not found:
                raise CliError("the program has no answer set", EXIT_ANSWER_SET)
            answer = found[0]
        ground = instantiate(program, answer | extras, arith_depth=config.arith_depth)
    except GroundingError as err:
        raise CliError(f"grounding failed: {err}", EXIT_INPUT) from err

    if query not in ground.base:
        raise CliError(f"query atom {query} is not in the Herbrand base", EXIT_QUERY)
    if not config.trust_answer_set and not is_answer_set(ground, answer):
        raise CliError("the given interpretation is not an answer set of the program", EXIT_ANSWER_SET)
    try:
        wf = well_founded_derivation(ground, answer)
    except ValueError as err:
        raise CliError(f"inconsistent answer set: {err}", EXIT_ANSWER_SET) from err
    return Prepared(ground, answer, query, wf)


def explain(prepared: Prepared, count: int = 1) -> list[Explanation]:
    ground, answer, query, wf = prepared.ground, prepared.answer, prepared.query, prepared.wf
    results = []
    for assumed in enumerate_assumption_sets(ground, answer, query, wf, limit=count):
        derivation = derivation_for(assumed, ground, answer, wf)
        dag = restrict_reachable(build_dag(derivation, ground, answer), query)
        cycle = check_acyclic(dag)
        if cycle is not None:
            raise RuntimeError("explanation graph has a cycle: " + " -> ".join(map(str, cycle)))
        results.append(Explanation(assumed, derivation, dag))
    return results


def render_output(prepared: Prepared, fmt: str, count: int = 1) -> str:
    if fmt == "facts":
        return export_serialized_facts(prepared.ground, prepared.answer, prepared.query, prepared.wf)
    chunks = []
    for item in explain(prepared, count):
        if fmt == "trace":
            chunks.append(item.derivation.trace())
        elif fmt == "dot":
            chunks.append(to_dot(item.dag))
        else:
            chunks.append(to_json(item.dag))
    return RECORD_DELIMITER.join(chunks)


def run(config: RunConfig) -> int:
    if config.format not in FORMATS:
        print(f"error: unknown format {config.format!r}", file=sys.stderr)
        return EXIT_INPUT
    if config.count < 1:
        print("error: --count must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        prepared = prepare(config)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.status
    try:
        text = render_output(prepared, config.format, config.count)
    except NoAssumptionSetError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ANSWER_SET
    if config.out is None:
        sys.stdout.write(text)
    else:
        config.out.write_text(text, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aspexplain",
        description="Explain why an atom is true or false in an answer set.",
    )
    parser.add_argument("--program", required=True, type=Path, help="program file")
    parser.add_argument("--answer-set", type=Path,
                        help="answer-set file; if omitted the first answer set found by brute force is used")
    parser.add_argument("--query", required=True, help="ground atom to explain")
    parser.add_argument("--format", choices=FORMATS, default="trace")
    parser.add_argument("--count", type=int, default=1, help="number of optimal explanations to emit")
    parser.add_argument("--out", type=Path, help="write output here instead of standard output")
    parser.add_argument("--trust-answer-set", action="store_true",
                        help="skip checking that the answer set is one")
    parser.add_argument("--extra-atom", action="append", default=[], dest="extra_atoms",
                        help="additional ground atom used as a grounding seed (repeatable)")
    parser.add_argument("--arith-depth", type=int, default=DEFAULT_ARITH_DEPTH,
                        help="cap on nested arithmetic during grounding")
    parser.add_argument("--oracle-cap", type=int, default=20,
                        help="largest base size for the brute-force answer-set search")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(RunConfig(
        program=args.program,
        query=args.query,
        answer_set=args.answer_set,
        format=args.format,
        count=args.count,
        out=args.out,
        trust_answer_set=args.trust_answer_set,
        extra_atoms=args.extra_atoms,
        arith_depth=args.arith_depth,
        oracle_cap=args.oracle_cap,
    ))


if __name__ == "__main__":
    sys.exit(main())
