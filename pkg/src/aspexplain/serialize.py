"""Fact-base export of (program, answer set, query) for differential testing with meta-encodings."""
from __future__ import annotations

from typing import AbstractSet

from .grounding import GroundChoice, GroundProgram
from .semantics import ThreeValued, satisfies
from .syntax import Atom


def export_serialized_facts(ground: GroundProgram, answer: AbstractSet[Atom], query: Atom,
                            wf: ThreeValued) -> str:
    """Ground facts describing base atoms, rules and aggregates, one per line, sorted."""
    facts: set[str] = {f"explain({query})"}
    for atom in ground.base:
        facts.add(f"atom({atom})")
        facts.add(f"{'true' if atom in answer else 'false'}({atom})")
        if atom not in wf.upper:
            facts.add(f"explained_by({atom},initial_well_founded)")

    for rule in ground.rules:
        rid = rule.id
        facts.add(f"rule({rid})")
        for atom in rule.head_atoms:
            facts.add(f"head({rid},{atom})")
        for atom in rule.pos:
            facts.add(f"pos_body({rid},{atom})")
        for atom in rule.neg:
            facts.add(f"neg_body({rid},{atom})")
        if isinstance(rule.head, GroundChoice):
            facts.add(f"choice({rid},{rule.head.lower},{rule.head.upper})")
        for agg in rule.aggregates:
            gid = agg.id
            facts.add(f"pos_body({rid},{gid})")
            facts.add(f"aggregate({gid})")
            instances = sorted({e.atom for e in agg.elements}, key=lambda a: a.key)
            if satisfies(answer, agg):
                facts.add(f"true({gid})")
                facts.add(f"rule({gid})")
                facts.add(f"head({gid},{gid})")
                for atom in instances:
                    kind = "pos_body" if atom in answer else "neg_body"
                    facts.add(f"{kind}({gid},{atom})")
            else:
                facts.add(f"false({gid})")
                for atom in instances:
                    pid = f"({gid},{atom})"
                    facts.add(f"rule({pid})")
                    facts.add(f"head({pid},{gid})")
                    kind = "neg_body" if atom in answer else "pos_body"
                    facts.add(f"{kind}({pid},{atom})")
    return "".join(f"{fact}.\n" for fact in sorted(facts))
