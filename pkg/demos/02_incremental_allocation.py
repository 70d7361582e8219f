"""Watch the per-task subgraph grow without ever reassigning a pair.

Each session hands new classes to extend_subgraph; a (relation, tail) pair
that one class claimed stays claimed, so later classes must take other facts
or fall back to two-hop paths. Run from the repository root:

    python3 demos/02_incremental_allocation.py
"""

from kgcil import KnowledgeGraph, TaskSubgraph, extend_subgraph, render_export

FACTS = [
    ("granny_smith", "IsA", "fruit"),
    ("granny_smith", "ReceiveAction", "eaten"),
    ("granny_smith", "AtLocation", "store"),
    ("pineapple", "IsA", "fruit"),
    ("pineapple", "AtLocation", "store"),
    ("pineapple", "AtLocation", "pizza"),
    ("mango", "IsA", "fruit"),
    ("mango", "AtLocation", "store"),
    ("fruit", "AtLocation", "market"),
]


def show(sub, graph):
    for cid, a in sub.assignments.items():
        paths = []
        for p in a.paths:
            rels = "_".join(graph.relation_name(r) for r in p.relations)
            paths.append(f"{rels}->{graph.entity_name(p.tail)}")
        print(f"  task {a.task_index} {graph.entity_name(cid)}: {', '.join(paths) or '(none)'}")


def main():
    graph = KnowledgeGraph.from_facts(FACTS)
    sub = TaskSubgraph(graph)

    print("session 0: granny_smith and pineapple, r=2")
    _, report = extend_subgraph(sub, ["granny_smith", "pineapple"], graph, 2)
    show(sub, graph)

    print("\nsession 1: mango arrives, r=2")
    _, report = extend_subgraph(sub, ["mango"], graph, 2)
    show(sub, graph)
    for grant in report.grants:
        print(f"  grant: {grant.name} requested {grant.requested} got {grant.granted}"
              f"{' via two-hop fallback' if grant.fallback_used else ''}")

    # mango's direct facts were already spoken for, hence the IsA_AtLocation path
    print("\nexport (the whole persistent state):")
    print(render_export(sub), end="")


if __name__ == "__main__":
    main()
