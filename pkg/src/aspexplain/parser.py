"""Recursive descent parser for programs and answer-set files."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .syntax import (
    FALSUM,
    NEG_PREFIX,
    Aggregate,
    ArithExpr,
    Atom,
    Choice,
    Comparison,
    Constant,
    Function,
    Literal,
    Program,
    Rule,
    String,
    Term,
    Variable,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


_TOKEN_SPEC = [
    ("WS", r"\s+"),
    ("COMMENT", r"%[^\n]*"),
    ("IF", r":-"),
    ("SUM", r"#sum\b"),
    ("NUMBER", r"\d+"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("VARIABLE", r"_*[A-Z][A-Za-z0-9_']*"),
    ("IDENT", r"_*[a-z][A-Za-z0-9_']*"),
    ("CMP", r"!=|<>|<=|>=|==|=|<|>"),
    ("PUNCT", r"[(){},;:.+\-*]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))
_CMP_CANON = {"==": "=", "<>": "!="}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("WS", "COMMENT"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    tokens.append(_Token("EOF", "", line, pos - line_start + 1))
    return tokens


@dataclass(frozen=True)
class _StrongNeg:
    term: Term


def _unescape(literal: str) -> str:
    body = literal[1:-1]
    return re.sub(r"\\(.)", lambda m: "\n" if m.group(1) == "n" else m.group(1), body)


class _Parser:
    def __init__(self, text: str, arities: Optional[dict[str, int]] = None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.arities: dict[str, int] = dict(arities or {})
        self.strong: dict[str, int] = {}

    # token helpers
    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> _Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("PUNCT", "IF") and self.tok.text == text

    def error(self, message: str, tok: Optional[_Token] = None) -> ParseError:
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{message} (found {found!r})", tok.line, tok.column)

    def expect(self, text: str) -> _Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        tok = self.tok
        self.pos += 1
        return tok

    # terms
    def term(self) -> Union[Term, _StrongNeg]:
        left = self.product()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.pos += 1
            right = self.product()
            left = ArithExpr(op, self._arith_operand(left), self._arith_operand(right))
        return left

    def product(self) -> Union[Term, _StrongNeg]:
        left = self.unary()
        while self.at("*"):
            self.pos += 1
            right = self.unary()
            left = ArithExpr("*", self._arith_operand(left), self._arith_operand(right))
        return left

    def _arith_operand(self, t):
        if isinstance(t, _StrongNeg) or isinstance(t, (String, Function)) or (
            isinstance(t, Constant) and not isinstance(t.value, int)
        ):
            raise self.error("arithmetic over non-integer term")
        return t

    def unary(self) -> Union[Term, _StrongNeg]:
        if self.at("-"):
            minus = self.tok
            self.pos += 1
            operand = self.unary()
            if isinstance(operand, Constant) and isinstance(operand.value, int):
                return Constant(-operand.value)
            if isinstance(operand, (Variable, ArithExpr)):
                return ArithExpr("-", Constant(0), operand)
            if isinstance(operand, Constant) or (isinstance(operand, Function) and operand.name):
                return _StrongNeg(operand)
            raise self.error("invalid operand for '-'", minus)
        return self.primary()

    def primary(self) -> Term:
        tok = self.tok
        if tok.kind == "NUMBER":
            self.pos += 1
            return Constant(int(tok.text))
        if tok.kind == "STRING":
            self.pos += 1
            return String(_unescape(tok.text))
        if tok.kind == "VARIABLE":
            self.pos += 1
            return Variable(tok.text)
        if tok.kind == "IDENT":
            if tok.text == "not":
                raise self.error("'not' is reserved")
            self.pos += 1
            if self.at("("):
                return Function(tok.text, self.arguments())
            return Constant(tok.text)
        if self.at("("):
            self.pos += 1
            items = [self.plain_term()]
            trailing = False
            while self.at(","):
                self.pos += 1
                if self.at(")"):
                    trailing = True
                    break
                items.append(self.plain_term())
            self.expect(")")
            if len(items) == 1 and not trailing:
                return items[0]
            return Function("", tuple(items))
        raise self.error("expected a term")

    def arguments(self) -> tuple[Term, ...]:
        self.expect("(")
        args = [self.plain_term()]
        while self.at(","):
            self.pos += 1
            args.append(self.plain_term())
        self.expect(")")
        return tuple(args)

    def plain_term(self) -> Term:
        start = self.tok
        t = self.term()
        if isinstance(t, _StrongNeg):
            raise self.error("strong negation is only allowed on atoms", start)
        return t

    # atoms and rules
    def to_atom(self, t, tok: _Token) -> Atom:
        negated = isinstance(t, _StrongNeg)
        if negated:
            t = t.term
        if isinstance(t, Constant) and isinstance(t.value, str):
            atom = Atom(t.value, ())
        elif isinstance(t, Function) and t.name:
            atom = Atom(t.name, t.args)
        else:
            raise self.error("expected an atom", tok)
        if negated:
            self.register(atom.predicate, atom.arity, tok, strong=True)
            atom = Atom(NEG_PREFIX + atom.predicate, atom.args)
        self.register(atom.predicate, atom.arity, tok)
        return atom

    def register(self, predicate: str, arity: int, tok: _Token, strong: bool = False) -> None:
        known = self.arities.setdefault(predicate, arity)
        if known != arity:
            raise ParseError(
                f"predicate {predicate!r} used with arity {arity} and {known}", tok.line, tok.column
            )
        if strong:
            self.strong.setdefault(predicate, arity)

    def atom(self) -> Atom:
        tok = self.tok
        return self.to_atom(self.term(), tok)

    def statement(self, index: int) -> Rule:
        if self.at(":-"):
            head: Union[Atom, Choice] = FALSUM
        else:
            head = self.head()
        body: tuple = ()
        if self.at(":-"):
            self.pos += 1
            if not self.at("."):
                body = self.body()
        elif head is FALSUM:
            raise self.error("expected ':-'")
        self.expect(".")
        return Rule(head, body, index)

    def head(self) -> Union[Atom, Choice]:
        if self.at("{"):
            return self.choice(None)
        tok = self.tok
        t = self.term()
        if self.at("{"):
            if isinstance(t, _StrongNeg):
                raise self.error("invalid choice bound", tok)
            return self.choice(t)
        return self.to_atom(t, tok)

    def choice(self, lower: Optional[Term]) -> Choice:
        self.expect("{")
        atoms = [self.atom()]
        while self.at(";"):
            self.pos += 1
            atoms.append(self.atom())
        self.expect("}")
        upper: Optional[Term] = None
        if not (self.at(":-") or self.at(".")):
            upper = self.plain_term()
        return Choice(
            lower if lower is not None else Constant(0),
            upper if upper is not None else Constant(len(atoms)),
            tuple(atoms),
        )

    def body(self) -> tuple:
        elems = [self.body_element()]
        while self.at(","):
            self.pos += 1
            elems.append(self.body_element())
        return tuple(elems)

    def comparison_op(self) -> Optional[str]:
        if self.tok.kind == "CMP":
            op = self.tok.text
            self.pos += 1
            return _CMP_CANON.get(op, op)
        return None

    def body_element(self):
        tok = self.tok
        if tok.kind == "IDENT" and tok.text == "not":
            self.pos += 1
            return Literal(self.atom(), True)
        if tok.kind == "SUM":
            return self.aggregate()
        t = self.term()
        op = self.comparison_op()
        if op is not None:
            if isinstance(t, _StrongNeg):
                raise self.error("comparison over a strongly negated atom", tok)
            return Comparison(t, op, self.plain_term())
        return Literal(self.to_atom(t, tok), False)

    def aggregate(self) -> Aggregate:
        self.pos += 1
        self.expect("{")
        terms = [self.plain_term()]
        while self.at(","):
            self.pos += 1
            terms.append(self.plain_term())
        self.expect(":")
        condition = self.atom()
        self.expect("}")
        op = self.comparison_op()
        if op is None:
            raise self.error("expected a comparison operator after #sum{...}")
        return Aggregate(terms[0], tuple(terms[1:]), condition, op, self.plain_term())

    def program(self) -> Program:
        rules = []
        while self.tok.kind != "EOF":
            rules.append(self.statement(len(rules) + 1))
        for predicate, arity in self.strong.items():
            args = tuple(Variable(f"X{i}") for i in range(1, arity + 1))
            rules.append(
                Rule(
                    FALSUM,
                    (Literal(Atom(predicate, args)), Literal(Atom(NEG_PREFIX + predicate, args))),
                    len(rules) + 1,
                )
            )
        return Program(tuple(rules))


def parse_program(text: str) -> Program:
    """Parse program text; rules are numbered 1, 2, ... in textual order.

    Strongly negated atoms ``-p(...)`` are renamed to ``neg_p(...)`` and one
    consistency constraint per such predicate is appended after the rules.
    """
    return _Parser(text).program()


def parse_atom(text: str) -> Atom:
    parser = _Parser(text)
    atom = parser.atom()
    if parser.tok.kind != "EOF":
        raise parser.error("unexpected trailing input")
    return atom


def parse_term(text: str) -> Term:
    parser = _Parser(text)
    term = parser.plain_term()
    if parser.tok.kind != "EOF":
        raise parser.error("unexpected trailing input")
    return term


def parse_answer_set(text: str, program: Optional[Program] = None) -> frozenset[Atom]:
    """Parse whitespace-separated ground atoms (an optional ``.`` after each is accepted)."""
    parser = _Parser(text, program.predicates() if program is not None else None)
    atoms = set()
    while parser.tok.kind != "EOF":
        tok = parser.tok
        atom = parser.atom()
        if not atom.is_ground:
            raise ParseError(f"non-ground atom {atom}", tok.line, tok.column)
        atoms.add(atom)
        if parser.at("."):
            parser.pos += 1
    return frozenset(atoms)
