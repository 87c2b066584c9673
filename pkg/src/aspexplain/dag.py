"""Explanation DAGs: construction from a derivation, reachability, acyclicity and export."""
from __future__ import annotations

import graphlib
import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import AbstractSet, Iterable, Optional

from .explanation import Derivation, Record
from .grounding import GroundProgram, GroundRule
from .parser import parse_atom
from .reasons import (
    ASSUMPTION,
    CHOICE_RULE,
    INITIAL_WELL_FOUNDED,
    LACK_OF_SUPPORT,
    REQUIRED_TO_FALSIFY_BODY,
    SUPPORT,
    Reason,
)
from .semantics import F, T, TruthValue
from .syntax import Atom

Link = tuple[Atom, Atom]


class DerivationError(RuntimeError):
    """A derivation does not justify the links its reasons demand."""


@dataclass(frozen=True)
class DagVertex:
    id: Atom
    truth: TruthValue
    reason: Reason
    index: int

    @property
    def label(self) -> str:
        return f"not {self.id}" if self.truth is F else str(self.id)

    @property
    def sort_key(self) -> tuple:
        return (self.index, self.id.key)


@dataclass(frozen=True)
class ExplanationDAG:
    vertices: frozenset[DagVertex] = frozenset()
    links: frozenset[Link] = frozenset()

    @cached_property
    def by_id(self) -> dict[Atom, DagVertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def successors(self) -> dict[Atom, list[Atom]]:
        out: dict[Atom, list[Atom]] = {v.id: [] for v in self.vertices}
        for source, target in self.links:
            out.setdefault(source, []).append(target)
        for targets in out.values():
            targets.sort(key=self._atom_key)
        return out

    def _atom_key(self, atom: Atom) -> tuple:
        vertex = self.by_id.get(atom)
        return vertex.sort_key if vertex is not None else (-1, atom.key)

    def sorted_vertices(self) -> list[DagVertex]:
        return sorted(self.vertices, key=lambda v: v.sort_key)

    def sorted_links(self) -> list[Link]:
        return sorted(self.links, key=lambda l: (self._atom_key(l[0]), self._atom_key(l[1])))


# --- construction ----------------------------------------------------------

def _body_ids(rule: GroundRule, skip: Optional[Atom] = None) -> list[Atom]:
    ids = [a for a in rule.pos if a != skip]
    ids += list(rule.neg)
    ids += [g.id for g in rule.aggregates]
    return ids


def _earlier_false_element(rule: GroundRule, index: int, derivation: Derivation) -> Optional[Atom]:
    options = []

    def consider(subject: Atom, wanted: TruthValue) -> None:
        record = derivation.record_of(subject)
        if record is not None and record.truth is wanted and record.index < index:
            options.append((record.index, subject.key, subject))

    for atom in rule.pos:
        consider(atom, F)
    for atom in rule.neg:
        consider(atom, T)
    for agg in rule.aggregates:
        consider(agg.id, F)
    return min(options)[2] if options else None


def expected_links(record: Record, derivation: Derivation, ground: GroundProgram,
                   answer: AbstractSet[Atom]) -> list[Atom]:
    """Targets of the links leaving ``record``'s vertex, as dictated by its reason."""
    tag, subject = record.reason.tag, record.subject
    if tag in (ASSUMPTION, INITIAL_WELL_FOUNDED):
        return []
    aggregate = ground.aggregates.get(subject)
    if aggregate is not None:
        return sorted({e.atom for e in aggregate.elements}, key=lambda a: a.key)
    if tag == SUPPORT:
        return _body_ids(ground.rule_by_id[record.reason.rule])
    if tag == LACK_OF_SUPPORT:
        targets = []
        for rule in ground.by_head.get(subject, ()):
            chosen = _earlier_false_element(rule, record.index, derivation)
            if chosen is None:
                raise DerivationError(
                    f"{subject} lacks support but no body element of {rule.id} was falsified earlier"
                )
            targets.append(chosen)
        return targets
    rule = ground.rule_by_id[record.reason.rule]
    if tag == REQUIRED_TO_FALSIFY_BODY:
        return list(rule.head_atoms) + _body_ids(rule, skip=subject)
    if tag == CHOICE_RULE:
        return [a for a in rule.head_atoms if a in answer] + _body_ids(rule)
    raise DerivationError(f"unexpected reason {record.reason}")


def build_dag(derivation: Derivation, ground: GroundProgram, answer: AbstractSet[Atom]) -> ExplanationDAG:
    vertices = {}
    for record in derivation.all_records():
        vertices[record.subject] = DagVertex(record.subject, record.truth, record.reason, record.index)
    links = set()
    for record in derivation.all_records():
        for target in expected_links(record, derivation, ground, answer):
            if target not in vertices:
                raise DerivationError(f"link target {target} of {record.subject} was never explained")
            links.add((record.subject, target))
    return ExplanationDAG(frozenset(vertices.values()), frozenset(links))


def restrict_reachable(dag: ExplanationDAG, root: Atom) -> ExplanationDAG:
    """Induced subgraph on the vertices reachable from ``root``."""
    if root not in dag.by_id:
        raise KeyError(f"{root} is not a vertex of the DAG")
    seen = {root}
    queue = deque([root])
    while queue:
        for nxt in dag.successors.get(queue.popleft(), ()):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return ExplanationDAG(
        frozenset(v for v in dag.vertices if v.id in seen),
        frozenset(l for l in dag.links if l[0] in seen),
    )


def check_acyclic(dag: ExplanationDAG) -> Optional[list[Atom]]:
    """None when acyclic, otherwise a cycle ``[v1, v2, ..., v1]`` following link direction."""
    graph = {v: list(targets) for v, targets in dag.successors.items()}
    try:
        graphlib.TopologicalSorter(graph).prepare()
    except graphlib.CycleError as err:
        cycle = list(err.args[1])
        if not all((a, b) in dag.links for a, b in zip(cycle, cycle[1:])):
            cycle.reverse()
        return cycle
    return None


# --- export ----------------------------------------------------------------

def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(dag: ExplanationDAG) -> str:
    if not dag.vertices:
        return "digraph explanation {}\n"
    lines = ["digraph explanation {"]
    for v in dag.sorted_vertices():
        lines.append(f"  {_quote(str(v.id))} [label={_quote(v.label)}, reason={_quote(str(v.reason))}];")
    for source, target in dag.sorted_links():
        lines.append(f"  {_quote(str(source))} -> {_quote(str(target))};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json(dag: ExplanationDAG) -> str:
    nodes = [
        {"id": str(v.id), "truth": "true" if v.truth is T else "false", "reason": str(v.reason), "index": v.index}
        for v in dag.sorted_vertices()
    ]
    links = [{"source": str(s), "target": str(t)} for s, t in dag.sorted_links()]
    return json.dumps({"nodes": nodes, "links": links}, separators=(",", ":"), ensure_ascii=False) + "\n"


def parse_reason(text: str) -> Reason:
    text = text.strip()
    if not text.startswith("("):
        return Reason(text)
    tag, _, rule = text[1:-1].partition(",")
    return Reason(tag.strip(), parse_atom(rule.strip()))


def from_json(text: str) -> ExplanationDAG:
    data = json.loads(text)
    vertices = frozenset(
        DagVertex(parse_atom(n["id"]), T if n["truth"] == "true" else F, parse_reason(n["reason"]), int(n["index"]))
        for n in data["nodes"]
    )
    links = frozenset((parse_atom(l["source"]), parse_atom(l["target"])) for l in data["links"])
    return ExplanationDAG(vertices, links)


def link_pairs(dag: ExplanationDAG) -> Iterable[tuple[str, str]]:
    return [(str(s), str(t)) for s, t in dag.sorted_links()]
