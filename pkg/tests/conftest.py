import pytest

from cascadebridge.cascades import DiffusionEvent, build_cascades
from cascadebridge.graph import load_graph

# Transmission edges of the example social graph: (u, v) means v follows u.
FIG1_EDGES = [
    (1, 2), (2, 1), (1, 3), (1, 4), (3, 5), (2, 5), (5, 2), (3, 4),
    (4, 5), (3, 6), (1, 6), (2, 7), (2, 8), (8, 2), (7, 8), (3, 2),
]
FIG1_ORDER = [1, 2, 3, 4, 6, 7, 8]  # u1 posts, the rest retweet in this order

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def fig1_records():
    return [(f"u{v}", f"u{u}") for u, v in FIG1_EDGES]


def fig1_events(times=None):
    times = times or {u: 60 * i for i, u in enumerate(FIG1_ORDER)}
    events = [DiffusionEvent("m1", "u1", times[1])]
    for u in FIG1_ORDER[1:]:
        events.append(DiffusionEvent(f"m1-u{u}", f"u{u}", times[u], "m1", "retweet"))
    return events


@pytest.fixture
def fig1_graph():
    g, _ = load_graph(fig1_records())
    return g


@pytest.fixture
def fig1_tree(fig1_graph):
    trees, _ = build_cascades(fig1_graph, fig1_events())
    assert len(trees) == 1
    return trees[0]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
