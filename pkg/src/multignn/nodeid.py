"""Unique node IDs from an ego root via port-numbered BFS, and 1-WL refinement.

IDs are digit tuples in base ``2n``. In round ``k`` every node activated in
round ``k-1`` proposes ``id || out_port`` to its successors and
``id || (n + in_port)`` to its predecessors; an unlabelled node takes the
smallest proposal it receives. All proposals in a round share a length, so
tuple comparison equals numeric comparison.
"""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import DirectedMultigraph, GraphError, PortAssignment, assign_ports

NodeIdLabel = tuple[int, ...]


@dataclass
class NodeIdResult:
    labels: dict[int, NodeIdLabel]
    base: int
    # node -> every proposal it received in the round it was labelled
    proposals: dict[int, list[NodeIdLabel]] = field(default_factory=dict)
    unreachable: list[int] = field(default_factory=list)
    rounds: int = 0

    def declined(self, v: int) -> list[NodeIdLabel]:
        return sorted(set(p for p in self.proposals.get(v, []) if p != self.labels[v]))

    def as_int(self, v: int) -> int:
        value = 0
        for digit in self.labels[v]:
            value = value * self.base + digit
        return value


def format_label(label: NodeIdLabel, base: int) -> str:
    """Concatenated decimal digits when ``base <= 10``, dotted otherwise."""
    if base <= 10:
        return "".join(str(d) for d in label)
    return ".".join(str(d) for d in label)


def assign_unique_ids(
    g: DirectedMultigraph, ports: PortAssignment | None = None, root: int = 0
) -> NodeIdResult:
    if not 0 <= root < g.n:
        raise GraphError(f"root {root} out of range for n={g.n}")
    if ports is None:
        ports = assign_ports(g)
    n = g.n
    in_port = ports.in_port.tolist()
    out_port = ports.out_port.tolist()
    labels: dict[int, NodeIdLabel] = {root: (1,)}
    proposals: dict[int, list[NodeIdLabel]] = {}
    active = [root]
    finished: set[int] = set()
    rounds = 0
    while active:
        finished.update(active)
        received: dict[int, list[NodeIdLabel]] = {}
        for v in active:
            h = labels[v]
            for u, e in g.out_adj[v]:
                if u not in finished:
                    received.setdefault(u, []).append(h + (out_port[e],))
            for u, e in g.in_adj[v]:
                if u not in finished:
                    received.setdefault(u, []).append(h + (n + in_port[e],))
        if not received:
            break
        rounds += 1
        for u, props in received.items():
            labels[u] = min(props)
            proposals[u] = props
        active = sorted(received)
    unreachable = [v for v in range(n) if v not in labels]
    return NodeIdResult(labels, 2 * n, proposals, unreachable, rounds)


def undirected_distances(g: DirectedMultigraph, root: int) -> dict[int, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u, _ in g.out_adj[v] + g.in_adj[v]:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


# -- colour refinement -----------------------------------------------------


@dataclass
class RefinementColoring:
    colors: list[list[int]]  # colors[t][v], t = 0..rounds

    @property
    def rounds(self) -> int:
        return len(self.colors) - 1

    def final(self) -> list[int]:
        return self.colors[-1]

    def partition(self, t: int = -1) -> set[frozenset[int]]:
        classes: dict[int, set[int]] = {}
        for v, c in enumerate(self.colors[t]):
            classes.setdefault(c, set()).add(v)
        return {frozenset(s) for s in classes.values()}


def _digest(payload: str, key: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(payload.encode(), digest_size=16, key=key).digest(), "big")


def wl_refine(
    g: DirectedMultigraph,
    rounds: int,
    ego_root: int | None = None,
    ports: PortAssignment | None = None,
    reverse: bool = False,
    key: bytes = b"",
) -> RefinementColoring:
    """Hash-based 1-WL refinement matching what an MPNN can see.

    The next colour of ``v`` hashes its current colour with the sorted
    multiset of in-neighbour colours (each paired with the edge's ports when
    ``ports`` is given) and, with ``reverse``, the out-neighbour multiset.
    ``ego_root`` starts that node with a distinct colour. Colours are 128-bit
    integers; a different ``key`` gives an independent hash family.
    """
    if rounds < 0:
        raise ValueError("rounds must be non-negative")
    base = _digest("init", key)
    mark = _digest("ego", key)
    colors = [[mark if v == ego_root else base for v in range(g.n)]]
    src, dst = g.src.tolist(), g.dst.tolist()
    pin = ports.in_port.tolist() if ports is not None else None
    pout = ports.out_port.tolist() if ports is not None else None
    for _ in range(rounds):
        cur = colors[-1]
        incoming: list[list[tuple]] = [[] for _ in range(g.n)]
        outgoing: list[list[tuple]] = [[] for _ in range(g.n)]
        for e, (s, d) in enumerate(zip(src, dst)):
            extra = (pin[e], pout[e]) if pin is not None else ()
            incoming[d].append((cur[s],) + extra)
            if reverse:
                outgoing[s].append((cur[d],) + extra)
        nxt = []
        for v in range(g.n):
            payload = f"{cur[v]}|{sorted(incoming[v])}"
            if reverse:
                payload += f"|{sorted(outgoing[v])}"
            nxt.append(_digest(payload, key))
        colors.append(nxt)
    return RefinementColoring(colors)


def color_histogram(coloring: RefinementColoring, t: int = -1) -> list[int]:
    """The colour multiset after round ``t``, as a sorted list."""
    return sorted(coloring.colors[t])
