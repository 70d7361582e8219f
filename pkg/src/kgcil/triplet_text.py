"""Canonical triplet clause grammar: render assignments to text and back.

Rendering produces one clause per allocated path, clauses joined by '. ' with
a final '.':

    <class> <Relation> <tail>
    <class> <Rel1>_<Rel2> <tail>      (two-hop path)

Parsing is keyword-anchored. Any token equal to a relation name (case
folded), or to two relation names joined by '_', opens a capture; the tail is
everything up to '.', ',', ';', the next keyword, or end of input. Leading
articles are dropped, tail tokens are lowercased and joined by '_' so they
line up with entity-name normal form. Tokens before the first keyword (head
mentions, filler) are never captured.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .store import KnowledgeGraph, NameTable

# wording used when asking a captioning model for a relation-rich description
INSTRUCTION_PROMPT = (
    "Describe details of this photo from color, species, location, background, etc."
)

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+|[.,;]")
_BOUNDARY = {".", ",", ";"}
_ARTICLES = {"a", "an", "the"}


class EmptyAssignment(ValueError):
    """A class with no allocated paths cannot be rendered."""


@dataclass(frozen=True)
class ParsedTriplet:
    """Relation-id sequence (length 1 or 2) plus the normalized tail text."""

    relations: tuple[int, ...]
    tail: str


@dataclass(frozen=True)
class TrainingText:
    class_id: int
    text: str


def render_training_text(assignment, graph: KnowledgeGraph) -> TrainingText:
    """Render every allocated path of a class as one clause per path."""
    if not assignment.paths:
        raise EmptyAssignment(
            f"class {graph.entities.name(assignment.class_id)!r} has no allocated paths"
        )
    cname = graph.entities.name(assignment.class_id)
    clauses = []
    for p in assignment.paths:
        rel = "_".join(graph.relations.name(r) for r in p.relations)
        clauses.append(f"{cname} {rel} {graph.entities.name(p.tail)}")
    return TrainingText(assignment.class_id, ". ".join(clauses) + ".")


def _match_keyword(token: str, lower_idx: dict[str, int]) -> tuple[int, ...] | None:
    low = token.lower()
    rid = lower_idx.get(low)
    if rid is not None:
        return (rid,)
    for pos, ch in enumerate(low):
        if ch != "_":
            continue
        left = lower_idx.get(low[:pos])
        right = lower_idx.get(low[pos + 1:])
        if left is not None and right is not None:
            return (left, right)
    return None


def parse_triplets(text: str, relations: NameTable) -> list[ParsedTriplet]:
    """Extract (relation-sequence, tail) pairs from free text.

    Never raises on odd input; at worst returns an empty list. Duplicates are
    removed, first occurrence wins. Relations always come from the given
    table, so a parsed triplet can never name an unknown relation.
    """
    lower_idx = relations.lower_index()
    tokens = _TOKEN_RE.findall(text)
    out: list[ParsedTriplet] = []
    seen: set[tuple[tuple[int, ...], str]] = set()
    i, n = 0, len(tokens)
    while i < n:
        rels = _match_keyword(tokens[i], lower_idx) if tokens[i] not in _BOUNDARY else None
        if rels is None:
            i += 1
            continue
        j = i + 1
        tail_tokens: list[str] = []
        while j < n and tokens[j] not in _BOUNDARY and _match_keyword(tokens[j], lower_idx) is None:
            tail_tokens.append(tokens[j].lower())
            j += 1
        while tail_tokens and tail_tokens[0] in _ARTICLES:
            tail_tokens.pop(0)
        if tail_tokens:
            trip = ParsedTriplet(rels, "_".join(tail_tokens))
            key = (trip.relations, trip.tail)
            if key not in seen:
                seen.add(key)
                out.append(trip)
        i = j
    return out
