import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cascadebridge.errors import EmptyInputError, ParseError
from cascadebridge.graph import (
    degrees,
    from_edges,
    load_graph,
    read_edges_csv,
    write_edges_csv,
)

from conftest import FIG1_EDGES

edge_lists = st.lists(
    st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=1, max_size=60
)


def test_triangle():
    g, rep = load_graph([("a", "b"), ("b", "c"), ("c", "a")])
    assert (g.node_count, g.edge_count) == (3, 3)
    assert rep.edges == 3 and rep.duplicates == 0 and rep.self_loops == 0


def test_self_loop_dropped():
    g, rep = load_graph([("a", "a"), ("a", "b")])
    assert rep.self_loops == 1
    assert g.edge_count == 1
    g.check()


def test_orientation_follower_followee():
    # "a follows b": messages flow from b to a
    g, _ = load_graph([("a", "b")])
    a, b = g.user_id("a"), g.user_id("b")
    assert g.has_edge(b, a) and not g.has_edge(a, b)
    assert g.followers[b] == (a,) and g.followees[a] == (b,)


def test_fig1_degrees(fig1_graph):
    deg = degrees(fig1_graph)
    ix = fig1_graph.index
    assert fig1_graph.node_count == 8
    assert deg[ix["u2"]][0] == 4
    # arrows in the drawing are transmission edges, so u5 has 3 followees
    assert deg[ix["u5"]][1] == 3


def test_single_node_and_star():
    g = from_edges(["x"], [])
    assert degrees(g) == [(0, 0)]
    k = 7
    g, _ = load_graph([(f"l{i}", "hub") for i in range(k)])
    assert degrees(g)[g.user_id("hub")] == (k, 0)


def test_random_degrees_match_edge_scan():
    rng = np.random.default_rng(3)
    recs = {(int(a), int(b)) for a, b in rng.integers(0, 50, size=(300, 2)) if a != b}
    g, _ = load_graph([(str(a), str(b)) for a, b in sorted(recs)])
    deg = degrees(g)
    for u in range(g.node_count):
        ext = g.ids[u]
        n_in = sum(1 for a, b in recs if str(b) == ext)
        n_out = sum(1 for a, b in recs if str(a) == ext)
        assert deg[u] == (n_in, n_out)


def test_malformed_record_names_line():
    with pytest.raises(ParseError) as err:
        load_graph([("a", "b"), ("c",)])
    assert err.value.line == 2


def test_empty_input():
    with pytest.raises(EmptyInputError):
        load_graph([])


def test_csv_round_trip(tmp_path, fig1_graph):
    p = tmp_path / "edges.csv"
    write_edges_csv(fig1_graph, p)
    g2, _ = read_edges_csv(p)
    assert sorted((g2.ids[u], g2.ids[v]) for u, v in g2.edges()) == sorted(
        (fig1_graph.ids[u], fig1_graph.ids[v]) for u, v in fig1_graph.edges()
    )


def test_csv_parse_error_carries_path_and_line(tmp_path):
    p = tmp_path / "edges.csv"
    p.write_text("follower,followee\na,b\n\nc,d,e\n")
    with pytest.raises(ParseError) as err:
        read_edges_csv(p)
    assert err.value.line == 4 and str(p) in str(err.value)


@given(edge_lists)
def test_degree_sums_equal_edge_count(pairs):
    g, _ = load_graph([(str(a), str(b)) for a, b in pairs])
    deg = degrees(g)
    assert sum(d[0] for d in deg) == sum(d[1] for d in deg) == g.edge_count
    g.check()


@given(edge_lists)
@settings(max_examples=50)
def test_duplicated_records_idempotent(pairs):
    recs = [(str(a), str(b)) for a, b in pairs]
    g1, _ = load_graph(recs)
    g2, rep = load_graph(recs + recs)
    assert g1.ids == g2.ids and g1.followers == g2.followers
    assert rep.duplicates + rep.self_loops >= len(recs)


@given(edge_lists)
@settings(max_examples=50)
def test_id_round_trip(pairs):
    g, _ = load_graph([(f"x{a}", f"x{b}") for a, b in pairs])
    for ext in g.ids:
        assert g.external_id(g.user_id(ext)) == ext


def test_fig1_edge_list_complete(fig1_graph):
    ix = fig1_graph.index
    for u, v in FIG1_EDGES:
        assert fig1_graph.has_edge(ix[f"u{u}"], ix[f"u{v}"])
