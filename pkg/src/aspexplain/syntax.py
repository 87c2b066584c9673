"""Abstract syntax of the supported ASP fragment and its canonical printer."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Optional, Union

COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*")
NEG_PREFIX = "neg_"


@dataclass(frozen=True)
class Constant:
    """A symbolic constant (``a``) or an integer (``3``)."""

    value: Union[str, int]

    def __str__(self) -> str:
        return str(self.value)

    @property
    def is_ground(self) -> bool:
        return True


@dataclass(frozen=True)
class String:
    value: str

    def __str__(self) -> str:
        escaped = self.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'

    @property
    def is_ground(self) -> bool:
        return True


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name

    @property
    def is_ground(self) -> bool:
        return False


@dataclass(frozen=True)
class Function:
    """Compound term ``f(t1,...,tn)``; an empty name denotes a tuple ``(t1,...,tn)``."""

    name: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        inner = ",".join(str(a) for a in self.args)
        if not self.name and len(self.args) == 1:
            inner += ","
        return f"{self.name}({inner})"

    @cached_property
    def is_ground(self) -> bool:
        return all(a.is_ground for a in self.args)


@dataclass(frozen=True)
class ArithExpr:
    op: str
    left: Term
    right: Term

    def __str__(self) -> str:
        def side(t: Term) -> str:
            return f"({t})" if isinstance(t, ArithExpr) else str(t)
        return f"{side(self.left)}{self.op}{side(self.right)}"

    @cached_property
    def is_ground(self) -> bool:
        return self.left.is_ground and self.right.is_ground


Term = Union[Constant, String, Variable, Function, ArithExpr]


def term_key(term: Term) -> tuple:
    """Total order on terms: integers < symbols and compound terms < strings."""
    if isinstance(term, Constant):
        if isinstance(term.value, int):
            return (0, term.value)
        return (1, term.value, ())
    if isinstance(term, Function):
        return (1, term.name, tuple(term_key(a) for a in term.args))
    if isinstance(term, String):
        return (2, term.value)
    if isinstance(term, Variable):
        return (3, term.name)
    return (4, term.op, term_key(term.left), term_key(term.right))


def variables_of(term: Term) -> Iterator[str]:
    if isinstance(term, Variable):
        yield term.name
    elif isinstance(term, Function):
        for arg in term.args:
            yield from variables_of(arg)
    elif isinstance(term, ArithExpr):
        yield from variables_of(term.left)
        yield from variables_of(term.right)


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"

    @property
    def arity(self) -> int:
        return len(self.args)

    @cached_property
    def is_ground(self) -> bool:
        return all(a.is_ground for a in self.args)

    @cached_property
    def key(self) -> tuple:
        return (self.predicate, tuple(term_key(a) for a in self.args))

    def variables(self) -> Iterator[str]:
        for arg in self.args:
            yield from variables_of(arg)


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return f"not {self.atom}" if self.negated else str(self.atom)


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def __str__(self) -> str:
        return f"{self.left}{self.op}{self.right}"


@dataclass(frozen=True)
class Aggregate:
    """``#sum{weight,tuple... : condition} op guard``."""

    weight: Term
    tuple: tuple[Term, ...]
    condition: Atom
    op: str
    guard: Term

    def __str__(self) -> str:
        terms = ",".join(str(t) for t in (self.weight, *self.tuple))
        return f"#sum{{{terms} : {self.condition}}} {self.op} {self.guard}"


@dataclass(frozen=True)
class Choice:
    lower: Term
    upper: Term
    atoms: tuple[Atom, ...]

    @property
    def is_falsum(self) -> bool:
        return not self.atoms and self.lower == Constant(1) and self.upper == Constant(1)

    def __str__(self) -> str:
        if self.is_falsum:
            return ""
        return f"{self.lower} {{{'; '.join(str(a) for a in self.atoms)}}} {self.upper}"


FALSUM = Choice(Constant(1), Constant(1), ())

BodyElement = Union[Literal, Aggregate, Comparison]


@dataclass(frozen=True)
class Rule:
    head: Union[Atom, Choice]
    body: tuple[BodyElement, ...]
    source_index: int

    def __str__(self) -> str:
        head = str(self.head)
        if not self.body:
            return f"{head}." if head else ":- ."
        body = ", ".join(str(e) for e in self.body)
        return f"{head} :- {body}." if head else f":- {body}."

    @property
    def head_atoms(self) -> tuple[Atom, ...]:
        return (self.head,) if isinstance(self.head, Atom) else self.head.atoms

    @property
    def positive_body(self) -> tuple[Atom, ...]:
        return tuple(e.atom for e in self.body if isinstance(e, Literal) and not e.negated)

    @property
    def negative_body(self) -> tuple[Atom, ...]:
        return tuple(e.atom for e in self.body if isinstance(e, Literal) and e.negated)

    @property
    def aggregates(self) -> tuple[Aggregate, ...]:
        return tuple(e for e in self.body if isinstance(e, Aggregate))

    @property
    def comparisons(self) -> tuple[Comparison, ...]:
        return tuple(e for e in self.body if isinstance(e, Comparison))

    @property
    def is_fact(self) -> bool:
        return not self.body and isinstance(self.head, Atom)

    def variables(self) -> list[str]:
        """Variables in order of first occurrence, head first."""
        seen: dict[str, None] = {}

        def visit_terms(terms) -> None:
            for t in terms:
                for v in variables_of(t):
                    seen.setdefault(v, None)

        if isinstance(self.head, Atom):
            visit_terms(self.head.args)
        else:
            visit_terms((self.head.lower,))
            for atom in self.head.atoms:
                visit_terms(atom.args)
            visit_terms((self.head.upper,))
        for elem in self.body:
            if isinstance(elem, Literal):
                visit_terms(elem.atom.args)
            elif isinstance(elem, Comparison):
                visit_terms((elem.left, elem.right))
            else:
                visit_terms((elem.weight, *elem.tuple, *elem.condition.args, elem.guard))
        return list(seen)


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...] = ()

    def __str__(self) -> str:
        return "".join(f"{r}\n" for r in self.rules)

    def predicates(self) -> dict[str, int]:
        """Predicate name to arity, in order of first occurrence."""
        found: dict[str, int] = {}
        for rule in self.rules:
            for atom in _atoms_of_rule(rule):
                found.setdefault(atom.predicate, atom.arity)
        return found


def _atoms_of_rule(rule: Rule) -> Iterator[Atom]:
    yield from rule.head_atoms
    for elem in rule.body:
        if isinstance(elem, Literal):
            yield elem.atom
        elif isinstance(elem, Aggregate):
            yield elem.condition


def render(program: Program) -> str:
    """Canonical text of ``program``; :func:`parse_program` inverts it."""
    return str(program)


def strong_negation_of(predicate: str) -> Optional[str]:
    """Original predicate of a renamed strongly negated one, if any."""
    if predicate.startswith(NEG_PREFIX) and len(predicate) > len(NEG_PREFIX):
        return predicate[len(NEG_PREFIX):]
    return None
