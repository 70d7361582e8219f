from __future__ import annotations

import sys

import pytest

from kgcil import KnowledgeGraph

# six facts over six entities; the worked example used across the suite
FRUIT_FACTS = [
    ("granny_smith", "IsA", "fruit"),
    ("granny_smith", "ReceiveAction", "eaten"),
    ("granny_smith", "AtLocation", "store"),
    ("pineapple", "IsA", "fruit"),
    ("pineapple", "AtLocation", "store"),
    ("pineapple", "AtLocation", "pizza"),
]

# minimal two-hop fallback setup: clownfish's only direct tail gets used up
REEF_FACTS = [
    ("anemonefish", "RelatedTo", "water"),
    ("clownfish", "RelatedTo", "water"),
    ("water", "RelatedTo", "river"),
]


@pytest.fixture
def fruit_graph() -> KnowledgeGraph:
    return KnowledgeGraph.from_facts(FRUIT_FACTS)


@pytest.fixture
def reef_graph() -> KnowledgeGraph:
    return KnowledgeGraph.from_facts(REEF_FACTS)


@pytest.fixture
def fruit_tsv(tmp_path):
    path = tmp_path / "fruit.tsv"
    lines = ["# toy fruit graph"]
    lines += [f"{h}\t{r}\t{t}" for h, r, t in FRUIT_FACTS]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_tsv(path, facts):
    path.write_text("".join(f"{h}\t{r}\t{t}\n" for h, r, t in facts), encoding="utf-8")
    return path


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None) if module else None
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
