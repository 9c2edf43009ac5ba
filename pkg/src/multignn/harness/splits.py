"""Temporal train/validation/test splits over edges or nodes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..graph import DirectedMultigraph, from_arrays


@dataclass(frozen=True)
class SplitSpec:
    mode: str  # "independent_graphs" | "temporal_edges" | "temporal_nodes"
    fractions: tuple[float, ...]
    t1: int | None = None
    t2: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("independent_graphs", "temporal_edges", "temporal_nodes"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if not np.isclose(sum(self.fractions), 1.0) or min(self.fractions) < 0:
            raise ValueError(f"fractions must be non-negative and sum to 1, got {self.fractions}")
        if self.t1 is not None and self.t2 is not None and self.t1 > self.t2:
            raise ValueError("t1 must not exceed t2")


@dataclass(frozen=True, eq=False)
class TemporalSplit:
    spec: SplitSpec
    snapshots: tuple[DirectedMultigraph, DirectedMultigraph, DirectedMultigraph]
    masks: tuple[np.ndarray, np.ndarray, np.ndarray]  # edge ids or node ids per split


def _cut_points(count: int, fractions: tuple[float, float, float]) -> tuple[int, int]:
    c1 = int(round(fractions[0] * count))
    c2 = int(round((fractions[0] + fractions[1]) * count))
    return c1, c2


def _snapshot(g: DirectedMultigraph, edge_ids: np.ndarray) -> DirectedMultigraph:
    edge_ids = np.sort(edge_ids)
    return from_arrays(
        g.n, g.src[edge_ids], g.dst[edge_ids], g.timestamp[edge_ids], g.edge_features[edge_ids],
        g.node_features, g.node_names,
    )


def temporal_split(
    g: DirectedMultigraph,
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
    mode: str = "temporal_edges",
) -> TemporalSplit:
    """Cumulative snapshots at ``t1``, ``t2`` and ``t_max``.

    ``temporal_edges``: edges sorted by timestamp (ties by edge id) are cut at
    the cumulative fractions; each mask holds that split's edge ids, and the
    train/validation snapshots contain the edges up to the respective cut.

    ``temporal_nodes``: nodes are ordered by their first incident edge (ties
    by node id; isolated nodes last) and cut likewise. ``t1``/``t2`` are the
    first-seen times of the last train/validation node and the snapshots keep
    the edges with ``timestamp <= t1`` / ``<= t2``.
    """
    if len(fractions) != 3:
        raise ValueError("need three fractions")
    SplitSpec(mode, tuple(fractions))  # validates
    if mode == "temporal_edges":
        if g.m < 3:
            raise ValueError(f"cannot split {g.m} edges three ways")
        order = np.lexsort((np.arange(g.m), g.timestamp))
        c1, c2 = _cut_points(g.m, fractions)
        masks = (order[:c1], order[c1:c2], order[c2:])
        t1 = int(g.timestamp[order[c1 - 1]]) if c1 else int(g.timestamp[order[0]])
        t2 = int(g.timestamp[order[c2 - 1]]) if c2 else t1
        snaps = (_snapshot(g, order[:c1]), _snapshot(g, order[:c2]), g)
    elif mode == "temporal_nodes":
        if g.n < 3:
            raise ValueError(f"cannot split {g.n} nodes three ways")
        first = np.full(g.n, np.iinfo(np.int64).max)
        np.minimum.at(first, g.src, g.timestamp)
        np.minimum.at(first, g.dst, g.timestamp)
        order = np.lexsort((np.arange(g.n), first))
        c1, c2 = _cut_points(g.n, fractions)
        masks = (order[:c1], order[c1:c2], order[c2:])
        t_max = int(g.timestamp.max()) if g.m else 0
        t1 = min(int(first[order[c1 - 1]]), t_max) if c1 else 0
        t2 = min(int(first[order[c2 - 1]]), t_max) if c2 else t1
        snaps = (
            _snapshot(g, np.flatnonzero(g.timestamp <= t1)),
            _snapshot(g, np.flatnonzero(g.timestamp <= t2)),
            g,
        )
    else:
        raise ValueError(f"temporal_split does not handle mode {mode!r}")
    return TemporalSplit(SplitSpec(mode, tuple(fractions), t1, t2), snaps, masks)
