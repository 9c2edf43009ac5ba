"""Ego subgraphs: the k-hop neighbourhood of a centre, edges followed both ways."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..graph import DirectedMultigraph, GraphError, PortAssignment, from_arrays


@dataclass(frozen=True, eq=False)
class EgoSubgraph:
    center: int
    nodes: np.ndarray  # global ids; nodes[0] is the centre
    edges: np.ndarray  # global edge ids of the induced edges, ascending
    graph: DirectedMultigraph  # relabelled local copy
    ego_flag: np.ndarray
    in_port: np.ndarray  # inherited from the full graph
    out_port: np.ndarray


def _undirected_csr(g: DirectedMultigraph) -> sp.csr_matrix:
    a = sp.csr_matrix(
        (np.ones(2 * g.m), (np.concatenate([g.src, g.dst]), np.concatenate([g.dst, g.src]))),
        shape=(g.n, g.n),
    )
    a.sum_duplicates()
    return a


def sample_ego(
    g: DirectedMultigraph,
    center: int,
    hops: int,
    ports: PortAssignment,
    neighbor_cap: int | None = None,
    seed: int = 0,
) -> EgoSubgraph:
    """BFS ``hops`` steps from ``center`` ignoring edge direction.

    With ``neighbor_cap`` each expanded node keeps at most that many of its
    distinct neighbours, chosen uniformly with a generator seeded by
    ``(seed, center)``. All edges among the kept nodes are included.
    """
    if hops < 1:
        raise ValueError("hops must be >= 1")
    if not 0 <= center < g.n:
        raise GraphError(f"center {center} out of range for n={g.n}")
    adj = _undirected_csr(g)
    rng = np.random.default_rng([seed, center]) if neighbor_cap is not None else None
    order = [center]
    seen = {center}
    frontier = [center]
    for _ in range(hops):
        nxt = []
        for v in frontier:
            nbrs = adj.indices[adj.indptr[v]:adj.indptr[v + 1]]
            if neighbor_cap is not None and len(nbrs) > neighbor_cap:
                nbrs = np.sort(rng.choice(nbrs, size=neighbor_cap, replace=False))
            for u in nbrs.tolist():
                if u not in seen:
                    seen.add(u)
                    order.append(u)
                    nxt.append(u)
        frontier = nxt
    nodes = np.array(order, dtype=np.int64)
    return _induced(g, ports, center, nodes)


def _induced(g: DirectedMultigraph, ports: PortAssignment, center: int, nodes: np.ndarray) -> EgoSubgraph:
    local = np.full(g.n, -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    keep = np.flatnonzero((local[g.src] >= 0) & (local[g.dst] >= 0))
    sub = from_arrays(
        len(nodes),
        local[g.src[keep]],
        local[g.dst[keep]],
        g.timestamp[keep],
        g.edge_features[keep],
    )
    flag = np.zeros(len(nodes))
    flag[0] = 1.0
    return EgoSubgraph(center, nodes, keep, sub, flag, ports.in_port[keep], ports.out_port[keep])


def khop_membership(g: DirectedMultigraph, hops: int) -> sp.csr_matrix:
    """Boolean ``(n, n)`` matrix: row ``c`` marks nodes within ``hops`` of ``c``."""
    a = _undirected_csr(g)
    a.data[:] = 1
    reach = sp.identity(g.n, format="csr")
    for _ in range(hops):
        reach = reach + reach @ a
        reach.data[:] = 1
    reach.sort_indices()
    return reach.astype(bool).tocsr()


@dataclass
class EgoIndex:
    """Ego subgraphs of every node in a graph, stored as flat arrays.

    For centre ``c``: ``node_ptr[c]:node_ptr[c+1]`` slices ``nodes`` (centre
    first) and ``edge_ptr[c]:edge_ptr[c+1]`` slices ``edges`` together with
    the local endpoint indices ``local_src``/``local_dst``.
    """

    nodes: np.ndarray
    node_ptr: np.ndarray
    edges: np.ndarray
    local_src: np.ndarray
    local_dst: np.ndarray
    edge_ptr: np.ndarray

    def sizes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.diff(self.node_ptr), np.diff(self.edge_ptr)


def build_ego_index(g: DirectedMultigraph, hops: int) -> EgoIndex:
    """Vectorised equivalent of :func:`sample_ego` (no cap) for all centres.

    Non-centre nodes are listed in ascending id; the induced edges in
    ascending edge id.
    """
    reach = khop_membership(g, hops).tocsr()
    n = g.n
    # node lists: centre first, then the rest ascending
    counts = np.diff(reach.indptr)
    rows = np.repeat(np.arange(n), counts)
    cols = reach.indices
    not_center = cols != rows
    node_ptr = np.concatenate([[0], np.cumsum(counts)])
    nodes = np.empty(len(cols), dtype=np.int64)
    nodes[node_ptr[:-1]] = np.arange(n)
    fill = np.ones(len(cols), dtype=bool)
    fill[node_ptr[:-1]] = False
    nodes[fill] = cols[not_center]
    # local position (+1, so zero means absent) of every (centre, node) pair
    within = np.arange(len(cols)) - np.repeat(node_ptr[:-1], counts)
    local = sp.csr_matrix(
        (within + 1, (np.repeat(np.arange(n), counts), nodes)), shape=(n, n)
    )
    # induced edges: (centre, edge) pairs with both endpoints in the ego graph
    at_src = local[:, g.src].tocsr()
    at_dst = local[:, g.dst].tocsr()
    both = at_src.astype(bool).multiply(at_dst.astype(bool)).tocsr()
    both.sort_indices()
    src_vals = at_src.multiply(both).tocsr()
    dst_vals = at_dst.multiply(both).tocsr()
    src_vals.sort_indices()
    dst_vals.sort_indices()
    edge_ptr = both.indptr.astype(np.int64)
    return EgoIndex(
        nodes,
        node_ptr.astype(np.int64),
        both.indices.astype(np.int64),
        src_vals.data.astype(np.int64) - 1,
        dst_vals.data.astype(np.int64) - 1,
        edge_ptr,
    )
