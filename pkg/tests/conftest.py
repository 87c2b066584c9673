from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

import report
from aspexplain.explanation import well_founded_derivation
from aspexplain.grounding import GroundProgram, instantiate
from aspexplain.parser import parse_answer_set, parse_atom, parse_program
from aspexplain.semantics import ThreeValued
from aspexplain.syntax import Atom, Program

DATA = Path(__file__).parent / "data"


@dataclass(frozen=True)
class Case:
    program: Program
    answer: frozenset[Atom]
    query: Atom
    ground: GroundProgram
    wf: ThreeValued


def load_case(name: str, query: str, full: bool = False) -> Case:
    program = parse_program((DATA / f"{name}.lp").read_text())
    answer = parse_answer_set((DATA / f"{name}_answer.txt").read_text(), program)
    alpha = parse_atom(query)
    ground = instantiate(program, answer | {alpha}, full=full)
    return Case(program, answer, alpha, ground, well_founded_derivation(ground, answer))


RUN_QUERY = "arc(a,b)"
BLOCKS_QUERY = 'occurs(("putdown",constant("a")),0)'


@pytest.fixture(scope="session")
def run_case() -> Case:
    return load_case("run", RUN_QUERY)


@pytest.fixture(scope="session")
def run_full_case() -> Case:
    return load_case("run", RUN_QUERY, full=True)


@pytest.fixture(scope="session")
def blocks_case() -> Case:
    return load_case("blocksworld", BLOCKS_QUERY)


def pytest_terminal_summary(terminalreporter):
    if report.LINES:
        terminalreporter.section("acceptance criteria")
        for line in report.LINES:
            terminalreporter.write_line(line)
