"""Relevant instantiation of programs, seeded from an answer set and the query atom."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Iterator, Optional, Union

from .analysis import global_variables, validate_program
from .syntax import (
    ArithExpr,
    Atom,
    Comparison,
    Constant,
    Function,
    Program,
    Rule,
    String,
    Term,
    Variable,
    term_key,
)

Substitution = dict[str, Term]

DEFAULT_ARITH_DEPTH = 64


class GroundingError(ValueError):
    pass


@dataclass(frozen=True)
class AggregateElement:
    atom: Atom
    weight: int
    terms: tuple[Term, ...]

    @property
    def tuple_key(self) -> tuple:
        return (self.weight, self.terms)


@dataclass(frozen=True)
class GroundAggregate:
    """An aggregate whose global variables are substituted; local ones remain in ``condition``."""

    id: Atom
    weight: Term
    tuple: tuple[Term, ...]
    condition: Atom
    op: str
    guard: Term
    elements: tuple[AggregateElement, ...] = ()

    def __str__(self) -> str:
        terms = ",".join(str(t) for t in (self.weight, *self.tuple))
        return f"#sum{{{terms} : {self.condition}}} {self.op} {self.guard}"

    @cached_property
    def instance_atoms(self) -> frozenset[Atom]:
        return frozenset(e.atom for e in self.elements)


@dataclass(frozen=True)
class GroundChoice:
    lower: int
    upper: int
    atoms: tuple[Atom, ...]

    @property
    def is_falsum(self) -> bool:
        return not self.atoms and self.lower == 1 and self.upper == 1

    def __str__(self) -> str:
        if self.is_falsum:
            return ""
        return f"{self.lower} {{{'; '.join(str(a) for a in self.atoms)}}} {self.upper}"


Head = Union[Atom, GroundChoice]


@dataclass(frozen=True)
class GroundRule:
    id: Atom
    head: Head
    pos: tuple[Atom, ...]
    neg: tuple[Atom, ...]
    aggregates: tuple[GroundAggregate, ...]
    source_index: int

    @property
    def head_atoms(self) -> tuple[Atom, ...]:
        return (self.head,) if isinstance(self.head, Atom) else self.head.atoms

    @property
    def is_choice(self) -> bool:
        return isinstance(self.head, GroundChoice)

    @cached_property
    def key(self) -> tuple:
        return (self.source_index, tuple(term_key(a) for a in self.id.args))

    def atoms(self) -> Iterator[Atom]:
        yield from self.head_atoms
        yield from self.pos
        yield from self.neg
        for agg in self.aggregates:
            for element in agg.elements:
                yield element.atom

    def __str__(self) -> str:
        head = str(self.head)
        body = [str(a) for a in self.pos] + [f"not {a}" for a in self.neg]
        body += [str(g) for g in self.aggregates]
        if not body:
            return f"{head}." if head else ":- ."
        return f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}."


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[GroundRule, ...]
    base: frozenset[Atom]

    @cached_property
    def by_head(self) -> dict[Atom, tuple[GroundRule, ...]]:
        index: dict[Atom, list[GroundRule]] = {}
        for rule in self.rules:
            for atom in dict.fromkeys(rule.head_atoms):
                index.setdefault(atom, []).append(rule)
        return {a: tuple(rs) for a, rs in index.items()}

    @cached_property
    def by_positive_body(self) -> dict[Atom, tuple[GroundRule, ...]]:
        index: dict[Atom, list[GroundRule]] = {}
        for rule in self.rules:
            for atom in rule.pos:
                index.setdefault(atom, []).append(rule)
        return {a: tuple(rs) for a, rs in index.items()}

    @cached_property
    def aggregates(self) -> dict[Atom, GroundAggregate]:
        return {g.id: g for rule in self.rules for g in rule.aggregates}

    @cached_property
    def rule_by_id(self) -> dict[Atom, GroundRule]:
        return {r.id: r for r in self.rules}

    def dump(self) -> str:
        """Canonical text, one rule per line sorted by rule id."""
        return "".join(f"{r.id}: {r}\n" for r in sorted(self.rules, key=lambda r: r.key))


# --- terms -----------------------------------------------------------------

def substitute(term: Term, sigma: Substitution) -> Term:
    if isinstance(term, Variable):
        return sigma.get(term.name, term)
    if isinstance(term, Function):
        return Function(term.name, tuple(substitute(a, sigma) for a in term.args))
    if isinstance(term, ArithExpr):
        return evaluate(ArithExpr(term.op, substitute(term.left, sigma), substitute(term.right, sigma)))
    return term


def evaluate(term: Term) -> Term:
    """Fold ground arithmetic; leaves non-ground expressions untouched."""
    if isinstance(term, ArithExpr):
        left, right = evaluate(term.left), evaluate(term.right)
        if not (left.is_ground and right.is_ground):
            return ArithExpr(term.op, left, right)
        if not (_is_int(left) and _is_int(right)):
            raise GroundingError(f"arithmetic over non-integer terms: {left}{term.op}{right}")
        a, b = left.value, right.value
        return Constant(a + b if term.op == "+" else a - b if term.op == "-" else a * b)
    if isinstance(term, Function) and not term.is_ground:
        return term
    if isinstance(term, Function):
        return Function(term.name, tuple(evaluate(a) for a in term.args))
    return term


def _is_int(term: Term) -> bool:
    return isinstance(term, Constant) and isinstance(term.value, int)


def ground_atom(atom: Atom, sigma: Substitution) -> Atom:
    return Atom(atom.predicate, tuple(substitute(a, sigma) for a in atom.args))


def _ints_in(term: Term) -> Iterator[int]:
    if _is_int(term):
        yield term.value
    elif isinstance(term, Function):
        for a in term.args:
            yield from _ints_in(a)


def match(pattern: Term, value: Term, sigma: Substitution) -> Optional[Substitution]:
    """Extend ``sigma`` so that ``pattern`` instantiates to ground ``value``."""
    if isinstance(pattern, Variable):
        bound = sigma.get(pattern.name)
        if bound is None:
            return {**sigma, pattern.name: value}
        return sigma if bound == value else None
    if isinstance(pattern, Function):
        if not isinstance(value, Function) or value.name != pattern.name or len(value.args) != len(pattern.args):
            return None
        for p, v in zip(pattern.args, value.args):
            sigma = match(p, v, sigma)
            if sigma is None:
                return None
        return sigma
    if isinstance(pattern, ArithExpr):
        current = substitute(pattern, sigma)
        if current.is_ground:
            return sigma if current == value else None
        if not _is_int(value) or pattern.op not in "+-":
            raise GroundingError(f"cannot bind variables of arithmetic term {pattern}")
        left, right = substitute(pattern.left, sigma), substitute(pattern.right, sigma)
        if isinstance(left, Variable) and _is_int(right):
            solved = value.value - right.value if pattern.op == "+" else value.value + right.value
            return {**sigma, left.name: Constant(solved)}
        if isinstance(right, Variable) and _is_int(left):
            solved = value.value - left.value if pattern.op == "+" else left.value - value.value
            return {**sigma, right.name: Constant(solved)}
        raise GroundingError(f"cannot bind variables of arithmetic term {pattern}")
    return sigma if pattern == value else None


def match_atom(pattern: Atom, atom: Atom, sigma: Substitution) -> Optional[Substitution]:
    if pattern.predicate != atom.predicate or len(pattern.args) != len(atom.args):
        return None
    for p, v in zip(pattern.args, atom.args):
        sigma = match(p, v, sigma)
        if sigma is None:
            return None
    return sigma


def _compare(left: Term, op: str, right: Term) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    a, b = term_key(left), term_key(right)
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b}[op]


def compare(left: Term, op: str, right: Term) -> bool:
    return _compare(evaluate(left), op, evaluate(right))


# --- instantiation ---------------------------------------------------------

class _Universe:
    def __init__(self) -> None:
        self.by_pred: dict[str, list[Atom]] = {}
        self.atoms: set[Atom] = set()

    def add(self, atom: Atom) -> bool:
        if atom in self.atoms:
            return False
        self.atoms.add(atom)
        self.by_pred.setdefault(atom.predicate, []).append(atom)
        return True


def _has_open_arith(atom: Atom) -> bool:
    return any(isinstance(a, ArithExpr) or (isinstance(a, Function) and _has_open_arith(Atom("", a.args)))
               for a in atom.args if not a.is_ground)


def _join(atoms: list[Atom], universe: _Universe, sigma: Substitution) -> Iterator[Substitution]:
    if not atoms:
        yield sigma
        return
    first, rest = atoms[0], atoms[1:]
    for candidate in list(universe.by_pred.get(first.predicate, ())):
        extended = match_atom(first, candidate, sigma)
        if extended is not None:
            yield from _join(rest, universe, extended)


def _resolve_comparisons(comparisons: tuple[Comparison, ...], sigma: Substitution) -> Optional[Substitution]:
    pending = list(comparisons)
    while pending:
        progress = False
        for cmp in list(pending):
            left, right = substitute(cmp.left, sigma), substitute(cmp.right, sigma)
            if left.is_ground and right.is_ground:
                if not _compare(evaluate(left), cmp.op, evaluate(right)):
                    return None
            elif cmp.op == "=" and isinstance(left, Variable) and right.is_ground:
                sigma = {**sigma, left.name: evaluate(right)}
            elif cmp.op == "=" and isinstance(right, Variable) and left.is_ground:
                sigma = {**sigma, right.name: evaluate(left)}
            else:
                continue
            pending.remove(cmp)
            progress = True
        if not progress:
            raise GroundingError(f"cannot evaluate comparison {pending[0]}: unbound variables")
    return sigma


@dataclass
class _Proto:
    id: Atom
    head: Head
    pos: tuple[Atom, ...]
    neg: tuple[Atom, ...]
    aggregates: tuple[GroundAggregate, ...]
    source_index: int
    key: tuple


def _to_int(term: Term, what: str) -> int:
    term = evaluate(term)
    if not _is_int(term):
        raise GroundingError(f"{what} must be an integer, got {term}")
    return term.value


def _ground_guard(term: Term) -> Term:
    term = evaluate(term)
    if not term.is_ground:
        raise GroundingError(f"aggregate guard {term} is not ground")
    return term


def _instantiate_rule(rule: Rule, sigma: Substitution, globals_: tuple[str, ...],
                      agg_numbers: tuple[int, ...]) -> _Proto:
    values = tuple(evaluate(sigma[v]) for v in globals_)
    rid = Atom(f"r{rule.source_index}", values)
    if isinstance(rule.head, Atom):
        head: Head = ground_atom(rule.head, sigma)
    else:
        lower = _to_int(substitute(rule.head.lower, sigma), "choice lower bound")
        upper = _to_int(substitute(rule.head.upper, sigma), "choice upper bound")
        if lower < 0:
            raise GroundingError(f"negative choice lower bound in rule {rule.source_index}")
        atoms = tuple(dict.fromkeys(ground_atom(a, sigma) for a in rule.head.atoms))
        head = GroundChoice(lower, upper, atoms)
    pos = tuple(dict.fromkeys(ground_atom(a, sigma) for a in rule.positive_body))
    neg = tuple(dict.fromkeys(ground_atom(a, sigma) for a in rule.negative_body))
    aggs = []
    for number, agg in zip(agg_numbers, rule.aggregates):
        aggs.append(GroundAggregate(
            id=Atom(f"agg{number}", values),
            weight=substitute(agg.weight, sigma),
            tuple=tuple(substitute(t, sigma) for t in agg.tuple),
            condition=ground_atom(agg.condition, sigma),
            op=agg.op,
            guard=_ground_guard(substitute(agg.guard, sigma)),
        ))
    key = (rule.source_index, tuple(term_key(v) for v in values))
    return _Proto(rid, head, pos, neg, tuple(aggs), rule.source_index, key)


def _program_constants(program: Program, seeds: Iterable[Atom]) -> list[Term]:
    found: dict[Term, None] = {}

    def visit(term: Term) -> None:
        if isinstance(term, (Constant, String)):
            found.setdefault(term, None)
        elif isinstance(term, Function):
            for a in term.args:
                visit(a)
        elif isinstance(term, ArithExpr):
            visit(term.left)
            visit(term.right)

    for rule in program.rules:
        for atom in (*rule.head_atoms, *rule.positive_body, *rule.negative_body):
            for a in atom.args:
                visit(a)
        for agg in rule.aggregates:
            for t in (agg.weight, *agg.tuple, *agg.condition.args, agg.guard):
                visit(t)
        for cmp in rule.comparisons:
            visit(cmp.left)
            visit(cmp.right)
    for atom in seeds:
        for a in atom.args:
            visit(a)
    return sorted(found, key=term_key)


def _aggregate_numbers(program: Program) -> dict[int, tuple[int, ...]]:
    numbers, counter = {}, itertools.count(1)
    for rule in program.rules:
        numbers[rule.source_index] = tuple(next(counter) for _ in rule.aggregates)
    return numbers


def instantiate(program: Program, seed_atoms: Iterable[Atom] = (), *,
                arith_depth: int = DEFAULT_ARITH_DEPTH, full: bool = False) -> GroundProgram:
    """Ground ``program`` by matching positive bodies against a growing atom universe.

    The universe starts from the seed atoms and the fact heads; heads of produced
    ground rules join it until a fixpoint is reached. With ``full=True`` global
    variables instead range over every constant of the program and the seeds,
    which mirrors instantiation "in all possible ways" and is meant for tiny
    programs only.
    """
    validate_program(program)
    seeds = frozenset(seed_atoms)
    numbers = _aggregate_numbers(program)
    universe = _Universe()
    int_depth: dict[int, int] = {}
    for constant in _program_constants(program, seeds):
        if _is_int(constant):
            int_depth[constant.value] = 0
    for atom in sorted(seeds, key=lambda a: a.key):
        universe.add(atom)

    plans = []
    for rule in program.rules:
        globals_ = global_variables(rule)
        positive = sorted(rule.positive_body, key=_has_open_arith)
        plans.append((rule, globals_, positive))

    protos: dict[tuple, _Proto] = {}
    constants = _program_constants(program, seeds) if full else []

    def bindings(rule: Rule, globals_: tuple[str, ...], positive: list[Atom]) -> Iterator[Substitution]:
        if not globals_:
            candidates = iter([{}])
        elif full:
            names = list(dict.fromkeys(v for a in rule.positive_body for v in a.variables()))
            candidates = (dict(zip(names, combo)) for combo in itertools.product(constants, repeat=len(names)))
        else:
            candidates = _join(positive, universe, {})
        for sigma in candidates:
            resolved = _resolve_comparisons(rule.comparisons, sigma)
            if resolved is not None:
                yield resolved

    def admit(proto: _Proto, sigma: Substitution) -> bool:
        changed = False
        for atom in _head_atoms(proto.head):
            fresh = [v for a in atom.args for v in _ints_in(a) if v not in int_depth]
            if fresh:
                depth = 1 + max((int_depth.get(v, 0) for t in sigma.values() for v in _ints_in(t)), default=0)
                if depth > arith_depth:
                    raise GroundingError(
                        f"arithmetic depth cap {arith_depth} exceeded while deriving {atom}"
                    )
                for v in fresh:
                    int_depth[v] = depth
            changed |= universe.add(atom)
        return changed

    changed = True
    while changed:
        changed = False
        for rule, globals_, positive in plans:
            for sigma in list(bindings(rule, globals_, positive)):
                proto = _instantiate_rule(rule, sigma, globals_, numbers[rule.source_index])
                if proto.key in protos:
                    continue
                protos[proto.key] = proto
                if admit(proto, sigma):
                    changed = True
        if full:
            break

    ordered = [protos[k] for k in sorted(protos)]
    preliminary = set(seeds)
    for p in ordered:
        preliminary.update(_head_atoms(p.head))
        preliminary.update(p.pos)
        preliminary.update(p.neg)
    by_pred: dict[str, list[Atom]] = {}
    for atom in sorted(preliminary, key=lambda a: a.key):
        by_pred.setdefault(atom.predicate, []).append(atom)

    rules = []
    for p in ordered:
        aggs = tuple(replace(g, elements=aggregate_instances(g, by_pred)) for g in p.aggregates)
        rules.append(GroundRule(p.id, p.head, p.pos, p.neg, aggs, p.source_index))
    ground = GroundProgram(tuple(rules), frozenset())
    return GroundProgram(ground.rules, herbrand_base(ground, seeds))


def _head_atoms(head: Head) -> tuple[Atom, ...]:
    return (head,) if isinstance(head, Atom) else head.atoms


def herbrand_base(ground: GroundProgram, seed_atoms: Iterable[Atom] = ()) -> frozenset[Atom]:
    """All atoms occurring in the ground rules, aggregate instances included, plus the seeds."""
    base = set(seed_atoms)
    for rule in ground.rules:
        base.update(rule.atoms())
    return frozenset(base)


def aggregate_instances(agg: GroundAggregate,
                        base: Union[Iterable[Atom], dict[str, list[Atom]]]) -> tuple[AggregateElement, ...]:
    """One element per instance of the aggregate condition found in ``base``."""
    if isinstance(base, dict):
        candidates = base.get(agg.condition.predicate, ())
    else:
        candidates = sorted((a for a in base if a.predicate == agg.condition.predicate), key=lambda a: a.key)
    elements = []
    for atom in candidates:
        sigma = match_atom(agg.condition, atom, {})
        if sigma is None:
            continue
        weight = evaluate(substitute(agg.weight, sigma))
        if not _is_int(weight):
            raise GroundingError(f"aggregate {agg.id}: non-integer weight {weight}")
        terms = tuple(evaluate(substitute(t, sigma)) for t in agg.tuple)
        elements.append(AggregateElement(atom, weight.value, terms))
    return tuple(elements)


def expand(rule: GroundRule, interp: Iterable[Atom]) -> set[GroundRule]:
    """One normal rule per head atom of ``rule`` that is true in ``interp``."""
    interp = interp if isinstance(interp, (set, frozenset)) else set(interp)
    return {replace(rule, head=atom) for atom in rule.head_atoms if atom in interp}
