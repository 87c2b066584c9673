"""Static checks on parsed programs: safety, dependency graph, aggregate stratification."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .syntax import Aggregate, Choice, Comparison, Program, Rule, Variable, variables_of


class ProgramError(ValueError):
    pass


class SafetyError(ProgramError):
    pass


class StratificationError(ProgramError):
    pass


@dataclass(frozen=True)
class SafetyReport:
    rule: Rule
    global_vars: tuple[str, ...]
    local_vars: tuple[str, ...]
    unsafe: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.unsafe

    def __str__(self) -> str:
        if self.ok:
            return f"rule {self.rule.source_index} is safe"
        names = ", ".join(self.unsafe)
        return f"rule {self.rule.source_index} ({self.rule}): unsafe variable(s) {names}"


def global_variables(rule: Rule) -> tuple[str, ...]:
    """Variables bound by the positive body, closed under ``Var = ground-expression``.

    Returned in order of first occurrence in the rule text.
    """
    bound = {v for atom in rule.positive_body for v in atom.variables()}
    changed = True
    while changed:
        changed = False
        for cmp in rule.comparisons:
            if cmp.op != "=":
                continue
            for var, other in ((cmp.left, cmp.right), (cmp.right, cmp.left)):
                if (
                    isinstance(var, Variable)
                    and var.name not in bound
                    and set(variables_of(other)) <= bound
                ):
                    bound.add(var.name)
                    changed = True
    return tuple(v for v in rule.variables() if v in bound)


def check_safety(rule: Rule) -> SafetyReport:
    glob = global_variables(rule)
    bound = set(glob)
    local: dict[str, None] = {}
    unsafe: dict[str, None] = {}

    def visit(terms, allowed=frozenset()) -> None:
        for t in terms:
            for v in variables_of(t):
                if v not in bound and v not in allowed:
                    unsafe.setdefault(v, None)

    if isinstance(rule.head, Choice):
        visit((rule.head.lower, rule.head.upper))
    for atom in rule.head_atoms:
        visit(atom.args)
    for elem in rule.body:
        if isinstance(elem, Comparison):
            visit((elem.left, elem.right))
        elif isinstance(elem, Aggregate):
            scoped = {v for v in elem.condition.variables() if v not in bound}
            for v in sorted(scoped):
                local.setdefault(v, None)
            visit((elem.weight, *elem.tuple, *elem.condition.args), frozenset(scoped))
            visit((elem.guard,))
        else:
            visit(elem.atom.args)
    order = rule.variables()
    return SafetyReport(
        rule,
        glob,
        tuple(v for v in order if v in local),
        tuple(v for v in order if v in unsafe),
    )


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    aggregate: bool = False


@dataclass(frozen=True)
class DependencyGraph:
    vertices: frozenset[str]
    edges: frozenset[Edge]

    def successors(self, vertex: str) -> list[str]:
        return sorted(e.target for e in self.edges if e.source == vertex)

    def has_edge(self, source: str, target: str) -> bool:
        return any(e.source == source and e.target == target for e in self.edges)


def dependency_graph(program: Program) -> DependencyGraph:
    """Edge p -> q when p heads a rule with q in its positive body or an aggregate condition.

    An edge is flagged ``aggregate`` if any occurrence producing it sits in an aggregate.
    """
    vertices = set(program.predicates())
    flags: dict[tuple[str, str], bool] = {}
    for rule in program.rules:
        for head in rule.head_atoms:
            for atom in rule.positive_body:
                flags.setdefault((head.predicate, atom.predicate), False)
            for agg in rule.aggregates:
                flags[(head.predicate, agg.condition.predicate)] = True
    edges = frozenset(Edge(p, q, agg) for (p, q), agg in flags.items())
    return DependencyGraph(frozenset(vertices), edges)


def _path(graph: DependencyGraph, start: str, goal: str) -> Optional[list[str]]:
    adjacency: dict[str, list[str]] = {}
    for e in graph.edges:
        adjacency.setdefault(e.source, []).append(e.target)
    parent: dict[str, Optional[str]] = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            path = [node]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for nxt in sorted(adjacency.get(node, ())):
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    return None


def check_stratification(program: Program) -> Optional[list[str]]:
    """Return a cycle through an aggregate edge as a vertex list ``[p, q, ..., p]``, or None."""
    graph = dependency_graph(program)
    for edge in sorted(graph.edges, key=lambda e: (e.source, e.target)):
        if not edge.aggregate:
            continue
        back = _path(graph, edge.target, edge.source)
        if back is not None:
            return [edge.source, *back]
    return None


def validate_program(program: Program) -> None:
    """Raise :class:`SafetyError` or :class:`StratificationError` if the program is not admissible."""
    reports = [r for r in map(check_safety, program.rules) if not r.ok]
    if reports:
        raise SafetyError("; ".join(str(r) for r in reports))
    cycle = check_stratification(program)
    if cycle is not None:
        raise StratificationError("cycle through an aggregate: " + " -> ".join(cycle))
