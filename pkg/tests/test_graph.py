import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multignn.gallery import (
    degree_in_example,
    degree_out_example,
    fan_in_distinct,
    fan_in_parallel,
    out_degree_pair,
    two_triangles_with_hub,
)
from multignn.graph import (
    EdgeRecord,
    GraphError,
    assign_ports,
    build_graph,
    degree_in,
    degree_out,
    degrees,
    fan_in,
    fan_out,
    from_arrays,
    ports_as_edge_features,
    read_edge_csv,
    relabel_graph,
    write_edge_csv,
    write_ports_csv,
)

from _graphs import random_multigraph


def test_build_graph_keeps_parallel_edges():
    g = build_graph(3, [(0, 1), (0, 1), (1, 2)])
    assert g.m == 3
    assert g.out_adj[0] == [(1, 0), (1, 1)]
    assert g.in_neighbors[1] == frozenset({0})


def test_build_graph_explicit_ids_reorder():
    g = build_graph(3, [EdgeRecord(1, 2, 7, (), 1), EdgeRecord(0, 1, 3, (), 0)])
    assert g.src.tolist() == [0, 1]
    assert g.timestamp.tolist() == [3, 7]


@pytest.mark.parametrize(
    "edges, msg",
    [
        ([EdgeRecord(0, 1, 0, (), 0), EdgeRecord(1, 0, 0, (), 0)], "duplicate edge id"),
        ([EdgeRecord(0, 1, 0, (), 0), EdgeRecord(1, 0, 0, (), None)], "all edges or none"),
        ([(0, 3)], "out of range"),
        ([(0, 1, 0, (1.0,)), (1, 0, 1, ())], "feature widths"),
    ],
)
def test_build_graph_errors(edges, msg):
    with pytest.raises(GraphError, match=msg):
        build_graph(2, edges)


def test_empty_graph():
    g = build_graph(4, [])
    assert g.m == 0
    assert degrees(g)["fan_in"].tolist() == [0, 0, 0, 0]
    assert len(assign_ports(g)) == 0


def test_hub_graph_edge_count():
    assert two_triangles_with_hub().m == 18


def test_counts_on_pattern_examples():
    g = degree_in_example()
    t = g.node_index("t")
    assert degree_in(g, t) == 4
    assert fan_in(g, t) == 3
    g = degree_out_example()
    s = g.node_index("s")
    assert degree_out(g, s) == 4
    assert fan_out(g, s) == 2
    g = out_degree_pair()
    assert [degree_out(g, g.node_index(x)) for x in "abcd"] == [2, 1, 0, 0]


def test_count_out_of_range():
    g = out_degree_pair()
    with pytest.raises(GraphError):
        degree_in(g, 9)


def test_vectorised_counts_match_scalar():
    rng = np.random.default_rng(3)
    g = random_multigraph(rng, 15, 60, loops=True)
    d = degrees(g)
    for v in range(g.n):
        assert d["deg_in"][v] == degree_in(g, v)
        assert d["deg_out"][v] == degree_out(g, v)
        assert d["fan_in"][v] == fan_in(g, v)
        assert d["fan_out"][v] == fan_out(g, v)


def test_ports_parallel_edges_share_a_port():
    g = fan_in_parallel()
    # q->t first (t=1), then the two p->t edges
    assert assign_ports(g).pairs() == [(1, 1), (2, 1), (2, 1)]
    feats = ports_as_edge_features(g, assign_ports(g))
    assert feats.tolist() == [[1.0, 1.0], [2.0, 1.0], [2.0, 1.0]]


def test_ports_distinct_sources():
    assert assign_ports(fan_in_distinct()).pairs() == [(1, 1), (2, 1), (3, 1)]


def test_ports_ordered_by_earliest_timestamp():
    # B->C at t=1 then two A->C edges: B takes in-port 1
    g = from_arrays(3, [1, 0, 0], [2, 2, 2], [1, 2, 3])
    assert assign_ports(g).pairs() == [(1, 1), (2, 1), (2, 1)]
    # later parallel edge does not move the group
    g = from_arrays(3, [0, 1, 0], [2, 2, 2], [1, 2, 3])
    assert assign_ports(g).in_port.tolist() == [1, 2, 1]


def test_port_ties_broken_by_neighbour_id():
    g = from_arrays(3, [2, 1], [0, 0], [5, 5])
    assert assign_ports(g).in_port.tolist() == [2, 1]


@st.composite
def multigraphs(draw):
    n = draw(st.integers(1, 8))
    m = draw(st.integers(0, 25))
    src = draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
    dst = draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))
    ts = draw(st.lists(st.integers(0, 5), min_size=m, max_size=m))
    return from_arrays(n, src, dst, ts)


@settings(max_examples=150, deadline=None)
@given(multigraphs())
def test_port_invariants(g):
    p = assign_ports(g)
    d = degrees(g)
    for v in range(g.n):
        ins = np.flatnonzero(g.dst == v)
        outs = np.flatnonzero(g.src == v)
        # ports at a node are exactly 1..fan
        assert sorted(set(p.in_port[ins].tolist())) == list(range(1, d["fan_in"][v] + 1))
        assert sorted(set(p.out_port[outs].tolist())) == list(range(1, d["fan_out"][v] + 1))
        # same neighbour <=> same port
        for a in ins:
            for b in ins:
                assert (g.src[a] == g.src[b]) == (p.in_port[a] == p.in_port[b])
        # earlier first contact => smaller port
        first = {}
        for e in ins:
            u = int(g.src[e])
            first[u] = min(first.get(u, (10**9, 0)), (int(g.timestamp[e]), u))
        order = sorted(first, key=lambda u: first[u])
        for rank, u in enumerate(order, start=1):
            assert set(p.in_port[ins[g.src[ins] == u]].tolist()) == {rank}


@settings(max_examples=60, deadline=None)
@given(multigraphs(), st.randoms(use_true_random=False))
def test_ports_equivariant_under_relabelling_with_distinct_times(g, rnd):
    g = from_arrays(g.n, g.src, g.dst, np.arange(g.m))
    perm = np.array(rnd.sample(range(g.n), g.n))
    h = relabel_graph(g, perm)
    assert assign_ports(g).pairs() == assign_ports(h).pairs()


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    g = random_multigraph(rng, 12, 40).with_edge_features(rng.normal(size=(40, 2)))
    path = tmp_path / "g.csv"
    write_edge_csv(g, path)
    h = read_edge_csv(path, n=12)
    assert h.n == 12
    assert np.array_equal(h.src, g.src) and np.array_equal(h.dst, g.dst)
    assert np.array_equal(h.timestamp, g.timestamp)
    assert np.array_equal(h.edge_features, g.edge_features)


def test_csv_named_nodes(tmp_path):
    path = tmp_path / "named.csv"
    path.write_text("src,dst,timestamp\nB1,A,1\nA,B1,2\nA,C,3\n")
    g = read_edge_csv(path)
    assert g.node_names == ("B1", "A", "C")
    assert g.node_index("C") == 2
    with pytest.raises(GraphError):
        g.node_index("Z")


def test_csv_edge_id_column_orders_edges(tmp_path):
    path = tmp_path / "ids.csv"
    path.write_text("edge_id,src,dst,timestamp\n1,1,0,9\n0,0,1,4\n")
    g = read_edge_csv(path)
    assert g.src.tolist() == [0, 1] and g.timestamp.tolist() == [4, 9]


@pytest.mark.parametrize(
    "text, msg",
    [("", "empty"), ("a,b\n1,2\n", "missing column"), ("src,dst,timestamp\n0,1,x\n", "malformed")],
)
def test_csv_errors(tmp_path, text, msg):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(GraphError, match=msg):
        read_edge_csv(path)


def test_write_ports_csv(tmp_path):
    path = tmp_path / "p.csv"
    write_ports_csv(assign_ports(fan_in_parallel()), path)
    assert path.read_text().splitlines() == ["edge_id,in_port,out_port", "0,1,1", "1,2,1", "2,2,1"]


def test_relabel_rejects_non_permutation():
    with pytest.raises(GraphError):
        relabel_graph(out_degree_pair(), [0, 0, 1, 2])
