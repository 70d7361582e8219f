"""Incremental allocation of exclusive relation-tail paths to classes.

Each class added to a TaskSubgraph is granted up to r distinct
(relation-sequence, tail) pairs. A pair granted once is never granted again,
so matching a pair at inference time identifies exactly one class. Direct
facts are consumed first in (relation id, tail id) order; when they run out,
two-hop chains serve as fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .store import KnowledgeGraph, normalize_name

PairKey = tuple[tuple[int, ...], int]

SUBGRAPH_FORMAT = "kgcil-subgraph v1"
_EXPORT_HEADER = "task\tclass\trelation\ttail"


class UnknownClass(ValueError):
    def __init__(self, name: str):
        super().__init__(f"class name not in graph: {name!r}")
        self.name = name


@dataclass(frozen=True)
class RelationPath:
    """One or two relation ids plus the terminal tail entity."""

    relations: tuple[int, ...]
    tail: int

    @property
    def key(self) -> PairKey:
        return (self.relations, self.tail)


@dataclass
class ClassAssignment:
    class_id: int
    paths: list[RelationPath]
    task_index: int


@dataclass
class ClassGrant:
    """Allocation outcome for a single class in one extension."""

    name: str
    requested: int
    granted: int
    fallback_used: bool
    unknown: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "requested": self.requested,
            "granted": self.granted,
            "fallback_used": self.fallback_used,
            "unknown": self.unknown,
        }


@dataclass
class AllocationReport:
    grants: list[ClassGrant] = field(default_factory=list)
    shortfall: list[str] = field(default_factory=list)
    unknown: list[str] = field(default_factory=list)

    def merge(self, other: "AllocationReport") -> None:
        self.grants.extend(other.grants)
        self.shortfall.extend(other.shortfall)
        self.unknown.extend(other.unknown)

    def to_dict(self) -> dict:
        return {
            "grants": [g.to_dict() for g in self.grants],
            "shortfall": list(self.shortfall),
            "unknown": list(self.unknown),
        }


class TaskSubgraph:
    """Evolving class -> relation-path registry with a global used-pair set."""

    def __init__(self, graph: KnowledgeGraph | None = None):
        self.graph = graph
        self.assignments: dict[int, ClassAssignment] = {}
        self.pair_to_class: dict[PairKey, int] = {}
        self.tasks = 0

    @property
    def used_pairs(self):
        # the used set is by construction the domain of pair_to_class
        return self.pair_to_class.keys()

    def is_empty(self) -> bool:
        return not self.assignments

    def class_of_pair(self, path) -> int | None:
        """Owning class id for a RelationPath or (relations, tail) key."""
        key = path.key if isinstance(path, RelationPath) else (tuple(path[0]), path[1])
        return self.pair_to_class.get(key)

    def class_names(self) -> list[str]:
        """Assigned class names in allocation order."""
        assert self.graph is not None or not self.assignments
        return [self.graph.entities.name(c) for c in self.assignments]

    def _bind(self, graph: KnowledgeGraph) -> None:
        if self.graph is None:
            self.graph = graph
        elif self.graph is not graph:
            raise ValueError("subgraph is already bound to a different graph")


def extend_subgraph(subgraph: TaskSubgraph, new_classes, graph: KnowledgeGraph,
                    r_target: int) -> tuple[TaskSubgraph, AllocationReport]:
    """Grant up to r_target unused pairs to each new class, in place.

    Unknown class names are collected in the report rather than raised; they
    end up in both the unknown and shortfall lists. Classes whose direct facts
    are exhausted fall back to two-hop chains; whatever is still missing after
    that is recorded as shortfall.
    """
    if r_target < 1:
        raise ValueError(f"r_target must be >= 1, got {r_target}")
    subgraph._bind(graph)
    task_index = subgraph.tasks
    report = AllocationReport()
    for raw in new_classes:
        name = normalize_name(raw)
        cid = graph.entities.get(name)
        if cid is None:
            report.grants.append(ClassGrant(name, r_target, 0, False, unknown=True))
            report.unknown.append(name)
            report.shortfall.append(name)
            continue
        if cid in subgraph.assignments:
            raise ValueError(f"class already assigned: {name!r}")
        paths: list[RelationPath] = []
        for fact in graph.facts_of(cid):
            if len(paths) >= r_target:
                break
            key = ((fact.relation,), fact.tail)
            if key in subgraph.pair_to_class:
                continue
            paths.append(RelationPath((fact.relation,), fact.tail))
            subgraph.pair_to_class[key] = cid
        fallback = False
        if len(paths) < r_target:
            for rels, tail in graph.two_hop_facts(cid):
                if len(paths) >= r_target:
                    break
                key = (rels, tail)
                if key in subgraph.pair_to_class:
                    continue
                paths.append(RelationPath(rels, tail))
                subgraph.pair_to_class[key] = cid
                fallback = True
        subgraph.assignments[cid] = ClassAssignment(cid, paths, task_index)
        report.grants.append(ClassGrant(name, r_target, len(paths), fallback))
        if len(paths) < r_target:
            report.shortfall.append(name)
    subgraph.tasks += 1
    return subgraph, report


def render_export(subgraph: TaskSubgraph) -> str:
    """Serialize a subgraph to its TSV form (also used for size accounting)."""
    lines = [f"# {SUBGRAPH_FORMAT}", _EXPORT_HEADER]
    graph = subgraph.graph
    for a in subgraph.assignments.values():
        cname = graph.entities.name(a.class_id)
        for p in a.paths:
            rel = "_".join(graph.relations.name(r) for r in p.relations)
            lines.append(f"{a.task_index}\t{cname}\t{rel}\t{graph.entities.name(p.tail)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExportStats:
    classes: int
    paths: int
    bytes: int

    def to_dict(self) -> dict:
        return {"classes": self.classes, "paths": self.paths, "bytes": self.bytes}


def export_subgraph(subgraph: TaskSubgraph, path) -> ExportStats:
    """Write the subgraph as TSV; returns row counts and the byte size."""
    payload = render_export(subgraph).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(payload)
    n_paths = sum(len(a.paths) for a in subgraph.assignments.values())
    return ExportStats(classes=len(subgraph.assignments), paths=n_paths, bytes=len(payload))


def _resolve_relation_label(label: str, graph: KnowledgeGraph) -> tuple[int, ...] | None:
    """Exact-name resolution of 'Rel' or 'Rel1_Rel2' against the relation table."""
    rid = graph.relations.get(label)
    if rid is not None:
        return (rid,)
    for pos, ch in enumerate(label):
        if ch != "_":
            continue
        left = graph.relations.get(label[:pos])
        right = graph.relations.get(label[pos + 1:])
        if left is not None and right is not None:
            return (left, right)
    return None


def import_subgraph(path, graph: KnowledgeGraph) -> TaskSubgraph:
    """Rebuild a TaskSubgraph from an exported TSV file."""
    sub = TaskSubgraph(graph)
    max_task = -1
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#") or line == _EXPORT_HEADER:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"subgraph line {line_no}: expected 4 fields, got {len(parts)}")
            task_s, cname, rel_s, tail_s = parts
            try:
                task_index = int(task_s)
            except ValueError:
                raise ValueError(f"subgraph line {line_no}: bad task index {task_s!r}") from None
            cid = graph.entities.get(normalize_name(cname))
            if cid is None:
                raise UnknownClass(cname)
            rels = _resolve_relation_label(rel_s, graph)
            if rels is None:
                raise ValueError(f"subgraph line {line_no}: unknown relation {rel_s!r}")
            tail = graph.entities.get(normalize_name(tail_s))
            if tail is None:
                raise ValueError(f"subgraph line {line_no}: unknown tail {tail_s!r}")
            key: PairKey = (rels, tail)
            owner = sub.pair_to_class.get(key)
            if owner is not None and owner != cid:
                raise ValueError(f"subgraph line {line_no}: pair already owned by another class")
            if cid not in sub.assignments:
                sub.assignments[cid] = ClassAssignment(cid, [], task_index)
            sub.assignments[cid].paths.append(RelationPath(rels, tail))
            sub.pair_to_class[key] = cid
            max_task = max(max_task, task_index)
    sub.tasks = max_task + 1
    return sub
