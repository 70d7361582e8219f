"""Graph-grounded inference: vote for a head class, augment, classify.

The pipeline mirrors how a relational description is turned into a label:
parsed triplets vote through the exclusive pair registry, the winning class
name is prepended to the raw text, and the augmented text is ranked against
candidate class names by cosine similarity.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .taskgraph import TaskSubgraph
from .triplet_text import ParsedTriplet, parse_triplets


class EmptyCandidates(ValueError):
    """classify needs at least one candidate class."""


@dataclass
class VoteTally:
    counts: dict[str, int] = field(default_factory=dict)
    matched: list[tuple[ParsedTriplet, str]] = field(default_factory=list)
    unmatched: list[ParsedTriplet] = field(default_factory=list)

    def best(self) -> str | None:
        """Highest-count class name; ties break to the smallest name."""
        if not self.counts:
            return None
        return min(self.counts, key=lambda name: (-self.counts[name], name))

    def is_tied(self) -> bool:
        if len(self.counts) < 2:
            return False
        top = max(self.counts.values())
        return sum(1 for v in self.counts.values() if v == top) > 1


@dataclass
class Prediction:
    final_class: str
    augmented_text: str
    similarity_scores: dict[str, float]
    tie: bool
    graph_head: str | None = None
    tally: VoteTally | None = None


def vote_head(triplets, subgraph: TaskSubgraph) -> tuple[VoteTally, str | None]:
    """Count pair-registry matches per class; every occurrence is one vote."""
    tally = VoteTally()
    graph = subgraph.graph
    for trip in triplets:
        cid = None
        if graph is not None:
            tail_id = graph.entities.get(trip.tail)
            if tail_id is not None:
                cid = subgraph.pair_to_class.get((trip.relations, tail_id))
        if cid is None:
            tally.unmatched.append(trip)
        else:
            name = graph.entities.name(cid)
            tally.counts[name] = tally.counts.get(name, 0) + 1
            tally.matched.append((trip, name))
    return tally, tally.best()


def augment_text(raw: str, head_name: str | None) -> str:
    if head_name is None:
        return raw
    return f"{head_name} {raw}" if raw else head_name


def _argmax(scores: dict[str, float]) -> tuple[str, bool]:
    best = min(scores, key=lambda name: (-scores[name], name))
    top = scores[best]
    tied = sum(1 for v in scores.values() if v == top) > 1
    return best, tied


def encode_candidates(names, encoder) -> np.ndarray:
    if not names:
        return np.zeros((0, encoder.dimension))
    return np.stack([encoder.encode(n) for n in names])


def classify(text: str, candidates, encoder, candidate_vectors: np.ndarray | None = None) -> Prediction:
    """Rank text against candidate class names by cosine; ties go lexicographic.

    candidate_vectors, when given, must be encoder outputs aligned with
    candidates (callers cache them to avoid re-encoding per sample).
    """
    candidates = list(candidates)
    if not candidates:
        raise EmptyCandidates("no candidate classes to rank against")
    if candidate_vectors is None:
        candidate_vectors = encode_candidates(candidates, encoder)
    vec = encoder.encode(text)
    sims = candidate_vectors @ vec
    scores = {name: float(s) for name, s in zip(candidates, sims)}
    best, tied = _argmax(scores)
    return Prediction(final_class=best, augmented_text=text, similarity_scores=scores, tie=tied)


def infer(raw_text: str, subgraph: TaskSubgraph, candidates, encoder,
          candidate_vectors: np.ndarray | None = None,
          timings: dict | None = None) -> Prediction:
    """parse -> vote -> augment -> classify, with the tally kept for diagnostics.

    When no triplet matches the registry the result equals classify(raw_text)
    with the empty tally attached.
    """
    t0 = time.perf_counter() if timings is not None else 0.0
    graph = subgraph.graph
    triplets = parse_triplets(raw_text, graph.relations) if graph is not None else []
    tally, head = vote_head(triplets, subgraph)
    if timings is not None:
        t1 = time.perf_counter()
        timings["vote_ms"] = timings.get("vote_ms", 0.0) + (t1 - t0) * 1000.0
        t0 = t1
    pred = classify(augment_text(raw_text, head), candidates, encoder, candidate_vectors)
    if timings is not None:
        timings["classify_ms"] = timings.get("classify_ms", 0.0) + (time.perf_counter() - t0) * 1000.0
    pred.graph_head = head
    pred.tally = tally
    return pred


def prediction_record(raw_text: str, pred: Prediction, relations, top_k: int = 3) -> dict:
    """JSON-ready per-sample diagnostic record."""

    def fmt(trip: ParsedTriplet) -> dict:
        return {"relations": [relations.name(r) for r in trip.relations], "tail": trip.tail}

    tally = pred.tally
    top = sorted(pred.similarity_scores.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
    return {
        "raw_text": raw_text,
        "matched": [{"triplet": fmt(t), "class": c} for t, c in tally.matched] if tally else [],
        "unmatched": [fmt(t) for t in tally.unmatched] if tally else [],
        "tally": dict(sorted(tally.counts.items())) if tally else {},
        "graph_head": pred.graph_head,
        "vote_tie": tally.is_tied() if tally else False,
        "final_class": pred.final_class,
        "similarity_tie": pred.tie,
        "top_similarities": [[name, round(score, 6)] for name, score in top],
    }
