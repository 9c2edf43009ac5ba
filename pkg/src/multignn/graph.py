"""Directed multigraphs with timestamped, feature-carrying parallel edges.

Nodes are dense integers ``0..n-1``. Edges keep their insertion order and are
stored column-wise (``src``, ``dst``, ``timestamp``, ``features``) so that the
message-passing code can index them as arrays; per-node adjacency lists are
built on demand.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class GraphError(ValueError):
    """Malformed graph input (bad endpoint, duplicate edge id, bad CSV row)."""


class EdgeRecord(NamedTuple):
    src: int
    dst: int
    timestamp: int = 0
    features: Sequence[float] = ()
    id: int | None = None


@dataclass(frozen=True, eq=False)
class DirectedMultigraph:
    n: int
    src: np.ndarray
    dst: np.ndarray
    timestamp: np.ndarray
    edge_features: np.ndarray
    node_features: np.ndarray | None = None
    node_names: tuple[str, ...] | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return len(self.src)

    @property
    def edges(self) -> list[EdgeRecord]:
        return [
            EdgeRecord(int(s), int(d), int(t), tuple(f), i)
            for i, (s, d, t, f) in enumerate(
                zip(self.src, self.dst, self.timestamp, self.edge_features)
            )
        ]

    @cached_property
    def out_adj(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for e, (s, d) in enumerate(zip(self.src.tolist(), self.dst.tolist())):
            adj[s].append((d, e))
        return adj

    @cached_property
    def in_adj(self) -> list[list[tuple[int, int]]]:
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for e, (s, d) in enumerate(zip(self.src.tolist(), self.dst.tolist())):
            adj[d].append((s, e))
        return adj

    @cached_property
    def out_neighbors(self) -> list[frozenset[int]]:
        """Distinct successors of every node (parallel edges collapsed)."""
        return [frozenset(u for u, _ in lst) for lst in self.out_adj]

    @cached_property
    def in_neighbors(self) -> list[frozenset[int]]:
        return [frozenset(u for u, _ in lst) for lst in self.in_adj]

    def node_label(self, v: int) -> str:
        return self.node_names[v] if self.node_names else str(v)

    def node_index(self, name: str | int) -> int:
        """Resolve an external node name (or integer id) to its dense index."""
        if self.node_names is not None:
            try:
                return self.node_names.index(str(name))
            except ValueError:
                raise GraphError(f"unknown node {name!r}") from None
        v = int(name)
        _check_node(self, v)
        return v

    def with_edge_features(self, features: np.ndarray) -> DirectedMultigraph:
        features = np.asarray(features, dtype=np.float64)
        if not (features.ndim == 2 and features.shape[0] == self.m):
            features = features.reshape(self.m, -1)
        return DirectedMultigraph(
            self.n, self.src, self.dst, self.timestamp, features,
            self.node_features, self.node_names,
        )

    def with_node_features(self, features: np.ndarray | None) -> DirectedMultigraph:
        if features is not None:
            features = np.asarray(features, dtype=np.float64).reshape(self.n, -1)
        return DirectedMultigraph(
            self.n, self.src, self.dst, self.timestamp, self.edge_features,
            features, self.node_names,
        )


def from_arrays(
    n: int,
    src: Iterable[int],
    dst: Iterable[int],
    timestamp: Iterable[int] | None = None,
    edge_features: np.ndarray | None = None,
    node_features: np.ndarray | None = None,
    node_names: Sequence[str] | None = None,
) -> DirectedMultigraph:
    """Vectorised constructor; edge ids are the array positions."""
    src = np.asarray(src, dtype=np.int64).reshape(-1)
    dst = np.asarray(dst, dtype=np.int64).reshape(-1)
    if src.shape != dst.shape:
        raise GraphError("src and dst must have the same length")
    m = len(src)
    if n < 0:
        raise GraphError(f"node count must be non-negative, got {n}")
    if m and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
        bad = int(np.flatnonzero((src < 0) | (src >= n) | (dst < 0) | (dst >= n))[0])
        raise GraphError(
            f"edge {bad} endpoint out of range: ({src[bad]}, {dst[bad]}) with n={n}"
        )
    if timestamp is None:
        ts = np.arange(m, dtype=np.int64)
    else:
        ts = np.asarray(timestamp, dtype=np.int64).reshape(-1)
        if len(ts) != m:
            raise GraphError("timestamp length does not match edge count")
    if edge_features is None:
        feats = np.zeros((m, 0))
    else:
        feats = np.asarray(edge_features, dtype=np.float64)
        if not (feats.ndim == 2 and feats.shape[0] == m):
            feats = feats.reshape(m, -1)
    if node_features is not None:
        node_features = np.asarray(node_features, dtype=np.float64).reshape(n, -1)
    names = tuple(str(x) for x in node_names) if node_names is not None else None
    if names is not None and len(names) != n:
        raise GraphError("node_names length does not match n")
    for arr in (src, dst, ts, feats):
        arr.setflags(write=False)
    return DirectedMultigraph(n, src, dst, ts, feats, node_features, names)


def build_graph(
    n: int,
    edges: Iterable[EdgeRecord | tuple],
    node_features: np.ndarray | None = None,
    node_names: Sequence[str] | None = None,
) -> DirectedMultigraph:
    """Build a multigraph from edge records.

    Records may be :class:`EdgeRecord` or plain tuples ``(src, dst[, timestamp
    [, features[, id]]])``. Timestamps default to the insertion index. When
    explicit ids are given the edges are stored in id order and the ids must
    form ``0..m-1``; otherwise insertion order is kept.
    """
    recs = [r if isinstance(r, EdgeRecord) else _as_record(r, i) for i, r in enumerate(edges)]
    ids = [r.id for r in recs]
    if any(i is not None for i in ids):
        if any(i is None for i in ids):
            raise GraphError("edge ids must be given for all edges or none")
        seen: set[int] = set()
        for i in ids:
            if i in seen:
                raise GraphError(f"duplicate edge id {i}")
            seen.add(i)
        if seen != set(range(len(recs))):
            raise GraphError("explicit edge ids must be dense in [0, m)")
        recs = sorted(recs, key=lambda r: r.id)
    widths = {len(r.features) for r in recs}
    if len(widths) > 1:
        raise GraphError(f"inconsistent edge feature widths {sorted(widths)}")
    k = widths.pop() if widths else 0
    feats = np.array([list(r.features) for r in recs], dtype=np.float64).reshape(len(recs), k)
    return from_arrays(
        n,
        [r.src for r in recs],
        [r.dst for r in recs],
        [r.timestamp for r in recs] if recs else [],
        feats,
        node_features,
        node_names,
    )


def relabel_graph(g: DirectedMultigraph, perm: np.ndarray) -> DirectedMultigraph:
    """Graph with node ``v`` renamed ``perm[v]``; edge order and timestamps kept."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(g.n)):
        raise GraphError("perm must be a permutation of range(n)")
    node_features = None
    if g.node_features is not None:
        node_features = np.empty_like(g.node_features)
        node_features[perm] = g.node_features
    return from_arrays(g.n, perm[g.src], perm[g.dst], g.timestamp, g.edge_features, node_features)


def _as_record(t: tuple, i: int) -> EdgeRecord:
    if len(t) < 2:
        raise GraphError(f"edge {i}: need at least (src, dst)")
    src, dst = t[0], t[1]
    ts = t[2] if len(t) > 2 else i
    feats = tuple(t[3]) if len(t) > 3 else ()
    eid = t[4] if len(t) > 4 else None
    return EdgeRecord(int(src), int(dst), int(ts), feats, eid)


def _check_node(g: DirectedMultigraph, v: int) -> None:
    if not 0 <= v < g.n:
        raise GraphError(f"node {v} out of range for n={g.n}")


def degree_in(g: DirectedMultigraph, v: int) -> int:
    _check_node(g, v)
    return len(g.in_adj[v])


def degree_out(g: DirectedMultigraph, v: int) -> int:
    _check_node(g, v)
    return len(g.out_adj[v])


def fan_in(g: DirectedMultigraph, v: int) -> int:
    _check_node(g, v)
    return len(g.in_neighbors[v])


def fan_out(g: DirectedMultigraph, v: int) -> int:
    _check_node(g, v)
    return len(g.out_neighbors[v])


def degrees(g: DirectedMultigraph) -> dict[str, np.ndarray]:
    """All four per-node counts at once, vectorised."""
    deg_in = np.bincount(g.dst, minlength=g.n)
    deg_out = np.bincount(g.src, minlength=g.n)
    pairs = np.unique(np.stack([g.src, g.dst], axis=1), axis=0) if g.m else np.zeros((0, 2), int)
    fan_in_ = np.bincount(pairs[:, 1], minlength=g.n)
    fan_out_ = np.bincount(pairs[:, 0], minlength=g.n)
    return {"deg_in": deg_in, "deg_out": deg_out, "fan_in": fan_in_, "fan_out": fan_out_}


# -- port numbering --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PortAssignment:
    in_port: np.ndarray
    out_port: np.ndarray

    def __len__(self) -> int:
        return len(self.in_port)

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.in_port.tolist(), self.out_port.tolist()))


def _rank_groups(node: np.ndarray, other: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Port of every edge at ``node``: neighbour groups ranked by earliest timestamp."""
    m = len(node)
    if m == 0:
        return np.zeros(0, dtype=np.int64)
    # group edges by (node, other)
    order = np.lexsort((ts, other, node))
    key_node, key_other = node[order], other[order]
    new_group = np.ones(m, dtype=bool)
    new_group[1:] = (key_node[1:] != key_node[:-1]) | (key_other[1:] != key_other[:-1])
    starts = np.flatnonzero(new_group)
    group_of_sorted = np.cumsum(new_group) - 1
    g_node = key_node[starts]
    g_other = key_other[starts]
    g_first_ts = ts[order][starts]  # sorted by ts within each group
    # rank groups within each node by (earliest ts, neighbour id)
    g_order = np.lexsort((g_other, g_first_ts, g_node))
    ranked_node = g_node[g_order]
    node_start = np.ones(len(g_order), dtype=bool)
    node_start[1:] = ranked_node[1:] != ranked_node[:-1]
    pos = np.arange(len(g_order))
    first_pos = np.maximum.accumulate(np.where(node_start, pos, 0))
    g_port = np.empty(len(g_order), dtype=np.int64)
    g_port[g_order] = pos - first_pos + 1
    port = np.empty(m, dtype=np.int64)
    port[order] = g_port[group_of_sorted]
    return port


def assign_ports(g: DirectedMultigraph) -> PortAssignment:
    """Multigraph port numbers, 1-based.

    At each node the incoming edges are grouped by source; groups are numbered
    1, 2, ... in order of their earliest timestamp (ties: smaller source id).
    Outgoing ports are assigned the same way over destinations.
    """
    in_port = _rank_groups(g.dst, g.src, g.timestamp)
    out_port = _rank_groups(g.src, g.dst, g.timestamp)
    in_port.setflags(write=False)
    out_port.setflags(write=False)
    return PortAssignment(in_port, out_port)


def ports_as_edge_features(g: DirectedMultigraph, p: PortAssignment) -> np.ndarray:
    """Edge feature matrix extended by the raw ``(in_port, out_port)`` columns."""
    if len(p) != g.m:
        raise GraphError("port assignment does not match graph")
    ports = np.stack([p.in_port, p.out_port], axis=1).astype(np.float64)
    return np.concatenate([g.edge_features, ports], axis=1)


# -- CSV interchange -------------------------------------------------------


def read_edge_csv(path: str | Path, n: int | None = None) -> DirectedMultigraph:
    """Read ``[edge_id,]src,dst,timestamp,feat_0..feat_{k-1}``.

    Integer node columns are used as dense ids directly. Any other node names
    are mapped to ids in order of first appearance and kept as ``node_names``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise GraphError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    missing = {"src", "dst"} - set(header)
    if missing:
        raise GraphError(f"{path}: missing column(s) {sorted(missing)}")
    col = {h: i for i, h in enumerate(header)}
    feat_cols = [i for i, h in enumerate(header) if h.startswith("feat_")]
    srcs, dsts = [], []
    try:
        for row in rows:
            srcs.append(row[col["src"]].strip())
            dsts.append(row[col["dst"]].strip())
        ts = [int(row[col["timestamp"]]) for row in rows] if "timestamp" in col else None
        feats = np.array([[float(row[i]) for i in feat_cols] for row in rows]).reshape(
            len(rows), len(feat_cols)
        )
        ids = [int(row[col["edge_id"]]) for row in rows] if "edge_id" in col else None
    except (ValueError, IndexError) as exc:
        raise GraphError(f"{path}: malformed row ({exc})") from None
    names: list[str] | None = None
    if all(_is_int(x) for x in srcs + dsts):
        s = np.array([int(x) for x in srcs], dtype=np.int64)
        d = np.array([int(x) for x in dsts], dtype=np.int64)
        if n is None:
            n = int(max(s.max(initial=-1), d.max(initial=-1)) + 1)
    else:
        index: dict[str, int] = {}
        for x in (y for pair in zip(srcs, dsts) for y in pair):
            index.setdefault(x, len(index))
        names = list(index)
        s = np.array([index[x] for x in srcs], dtype=np.int64)
        d = np.array([index[x] for x in dsts], dtype=np.int64)
        n = len(names)
    if ids is not None:
        if sorted(ids) != list(range(len(ids))):
            raise GraphError(f"{path}: edge_id column must be a permutation of 0..m-1")
        order = np.argsort(ids)
        s, d = s[order], d[order]
        feats = feats[order]
        ts = [ts[i] for i in order] if ts is not None else None
    return from_arrays(n, s, d, ts, feats, node_names=names)


def _is_int(x: str) -> bool:
    try:
        int(x)
    except ValueError:
        return False
    return True


def write_edge_csv(g: DirectedMultigraph, path: str | Path) -> None:
    k = g.edge_features.shape[1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge_id", "src", "dst", "timestamp"] + [f"feat_{i}" for i in range(k)])
        for e in range(g.m):
            w.writerow(
                [e, g.node_label(int(g.src[e])), g.node_label(int(g.dst[e])), int(g.timestamp[e])]
                + [repr(float(x)) for x in g.edge_features[e]]
            )


def write_ports_csv(p: PortAssignment, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["edge_id", "in_port", "out_port"])
        for e, (a, b) in enumerate(p.pairs()):
            w.writerow([e, a, b])
