"""Small hand-built graphs that illustrate each pattern and adaptation.

Timestamps follow the order edges are listed in, so port numbers are
determined by that order.
"""
from __future__ import annotations

from .graph import DirectedMultigraph, from_arrays


def _graph(names: list[str], edges: list[tuple[str, str]]) -> DirectedMultigraph:
    ix = {name: i for i, name in enumerate(names)}
    src = [ix[a] for a, _ in edges]
    dst = [ix[b] for _, b in edges]
    return from_arrays(len(names), src, dst, range(1, len(edges) + 1), node_names=names)


def out_degree_pair() -> DirectedMultigraph:
    """``a`` sends to ``c`` and ``d``; ``b`` sends to ``d``.

    Incoming-only message passing cannot tell ``a`` from ``b``, and
    direction-blind passing cannot tell ``a`` from ``d``.
    """
    return _graph(["a", "b", "c", "d"], [("a", "c"), ("a", "d"), ("b", "d")])


def fan_in_parallel() -> DirectedMultigraph:
    """``t`` receives two parallel edges from ``p`` and one from ``q``; fan-in 2.

    The ``q`` edge comes first, so it takes in-port 1 and both ``p`` edges
    share in-port 2.
    """
    return _graph(["p", "q", "t"], [("q", "t"), ("p", "t"), ("p", "t")])


def fan_in_distinct() -> DirectedMultigraph:
    """``t`` receives one edge from each of three nodes; fan-in 3."""
    return _graph(["p", "q", "s", "t"], [("p", "t"), ("q", "t"), ("s", "t")])


def _spoked(names: list[str], hub: str, ring_edges: list[tuple[str, str]]) -> DirectedMultigraph:
    spokes = []
    for v in names:
        if v != hub:
            spokes += [(hub, v), (v, hub)]
    return _graph(names, spokes + ring_edges)


def two_triangles_with_hub() -> DirectedMultigraph:
    """Hub ``u`` joined both ways to ``a..f``; ``a->b->c->a`` and ``d->e->f->d``.

    ``u`` lies on no 5-cycle.
    """
    names = ["u", "a", "b", "c", "d", "e", "f"]
    ring = [("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")]
    return _spoked(names, "u", ring)


def hexagon_with_hub() -> DirectedMultigraph:
    """Hub ``u`` joined both ways to ``a..f``; directed 6-cycle ``a->b->...->f->a``.

    ``u`` lies on 5-cycles such as ``u, a, b, c, d, u``. With only the hub
    marked, 1-WL colours this graph exactly like :func:`two_triangles_with_hub`.
    """
    names = ["u", "a", "b", "c", "d", "e", "f"]
    ring = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "a")]
    return _spoked(names, "u", ring)


def bfs_id_example() -> DirectedMultigraph:
    """Five nodes where port-numbered BFS from ``A`` declines two proposals.

    From root ``A`` (label 1) the labels are B1=11, B2=12, B3=17 and C=112.
    ``B1`` declines 16 (it is also a predecessor of ``A``) and ``C`` declines
    121 (offered by ``B2``).
    """
    names = ["A", "B1", "B2", "B3", "C"]
    edges = [("B1", "A"), ("A", "B1"), ("A", "B2"), ("B3", "A"), ("B1", "C"), ("B2", "C")]
    return _graph(names, edges)


# -- one instance per detection task --------------------------------------


def degree_in_example() -> DirectedMultigraph:
    """``t`` has in-degree 4: two parallel edges from ``p`` plus ``q`` and ``s``."""
    return _graph(["p", "q", "s", "t"], [("p", "t"), ("p", "t"), ("q", "t"), ("s", "t")])


def degree_out_example() -> DirectedMultigraph:
    """``s`` has out-degree 4 but fan-out 2 (two parallel edges to each target)."""
    return _graph(["s", "x", "y"], [("s", "x"), ("s", "x"), ("s", "y"), ("s", "y")])


def biclique_example() -> DirectedMultigraph:
    """Sources ``p, q, s`` each send to both sinks ``x`` and ``y``."""
    edges = [(a, b) for b in ("x", "y") for a in ("p", "q", "s")]
    return _graph(["p", "q", "s", "x", "y"], edges)


def scatter_gather_example() -> DirectedMultigraph:
    """Source ``s`` scatters to ``m1..m3`` which all gather into ``t``."""
    mids = ["m1", "m2", "m3"]
    edges = [("s", m) for m in mids] + [(m, "t") for m in mids]
    return _graph(["s"] + mids + ["t"], edges)


def directed_cycle(k: int) -> DirectedMultigraph:
    """``v0 -> v1 -> ... -> v{k-1} -> v0``."""
    names = [f"v{i}" for i in range(k)]
    return _graph(names, [(names[i], names[(i + 1) % k]) for i in range(k)])


def gather_scatter_example() -> DirectedMultigraph:
    """Three sources feed ``h``, which forwards to three sinks."""
    names = ["a1", "a2", "a3", "h", "c1", "c2", "c3"]
    edges = [(a, "h") for a in names[:3]] + [("h", c) for c in names[4:]]
    return _graph(names, edges)


GALLERY = {
    "out_degree_pair": out_degree_pair,
    "fan_in_parallel": fan_in_parallel,
    "fan_in_distinct": fan_in_distinct,
    "two_triangles_with_hub": two_triangles_with_hub,
    "hexagon_with_hub": hexagon_with_hub,
    "bfs_id_example": bfs_id_example,
    "degree_in_example": degree_in_example,
    "degree_out_example": degree_out_example,
    "biclique_example": biclique_example,
    "scatter_gather_example": scatter_gather_example,
    "cycle5": lambda: directed_cycle(5),
    "gather_scatter_example": gather_scatter_example,
}
