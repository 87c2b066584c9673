"""Reasons attached to decided atoms and aggregates."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .syntax import Atom, term_key

ASSUMPTION = "assumption"
INITIAL_WELL_FOUNDED = "initial_well_founded"
SUPPORT = "support"
LACK_OF_SUPPORT = "lack_of_support"
REQUIRED_TO_FALSIFY_BODY = "required_to_falsify_body"
CHOICE_RULE = "choice_rule"

TAGS = (ASSUMPTION, INITIAL_WELL_FOUNDED, SUPPORT, LACK_OF_SUPPORT, REQUIRED_TO_FALSIFY_BODY, CHOICE_RULE)
_WITH_RULE = (SUPPORT, REQUIRED_TO_FALSIFY_BODY, CHOICE_RULE)


@dataclass(frozen=True)
class Reason:
    tag: str
    rule: Optional[Atom] = None

    def __post_init__(self) -> None:
        if self.tag not in TAGS:
            raise ValueError(f"unknown reason tag {self.tag!r}")
        if (self.tag in _WITH_RULE) != (self.rule is not None):
            raise ValueError(f"reason {self.tag!r} {'needs' if self.rule is None else 'takes no'} rule id")

    def __str__(self) -> str:
        return self.tag if self.rule is None else f"({self.tag}, {self.rule})"

    @property
    def sort_key(self) -> tuple:
        rank = {LACK_OF_SUPPORT: 0, REQUIRED_TO_FALSIFY_BODY: 1, CHOICE_RULE: 2}.get(self.tag, 3)
        return (rank, identifier_key(self.rule) if self.rule is not None else ())


_ID_RE = re.compile(r"([a-z_]+?)(\d+)$")


def identifier_key(ident: Atom) -> tuple:
    """Sort key for ``r12(a)``/``agg3(0)`` ids that compares the numeric part numerically."""
    m = _ID_RE.match(ident.predicate)
    if m is None:
        return (ident.predicate, 0, tuple(term_key(a) for a in ident.args))
    return (m.group(1), int(m.group(2)), tuple(term_key(a) for a in ident.args))
