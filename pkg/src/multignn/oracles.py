"""Exact node labels for the synthetic subgraph-detection tasks.

Every labeler answers an existence question per node, so labels only ever go
from 0 to 1 as edges are added. Self-loops never take part in any pattern and
parallel edges count once except for the degree tasks.
"""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .graph import DirectedMultigraph, degrees


class TaskId(enum.IntEnum):
    DegIn = 0
    DegOut = 1
    FanIn = 2
    FanOut = 3
    C2 = 4
    C3 = 5
    C4 = 6
    C5 = 7
    C6 = 8
    ScatterGather = 9
    Biclique = 10

    @property
    def column(self) -> str:
        return TASK_COLUMNS[self]

    @classmethod
    def parse(cls, name: str) -> TaskId:
        key = name.strip().lower().replace("-", "_")
        aliases = {c: t for t, c in zip(cls, TASK_COLUMNS)}
        aliases.update({t.name.lower(): t for t in cls})
        aliases.update({"s_g": cls.ScatterGather, "b_c": cls.Biclique})
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown task {name!r}") from None


TASK_COLUMNS = ("deg_in", "deg_out", "fan_in", "fan_out", "c2", "c3", "c4", "c5", "c6", "sg", "bc")
ALL_TASKS = tuple(TaskId)
COMPLEX_TASKS = (TaskId.C4, TaskId.C5, TaskId.C6, TaskId.ScatterGather, TaskId.Biclique)
MAX_CYCLE = 6


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    values: np.ndarray  # (n, len(tasks)) uint8
    tasks: tuple[TaskId, ...] = ALL_TASKS

    @property
    def ratios(self) -> dict[str, float]:
        if len(self.values) == 0:
            return {t.column: 0.0 for t in self.tasks}
        mean = self.values.mean(axis=0)
        return {t.column: float(x) for t, x in zip(self.tasks, mean)}

    def column(self, task: TaskId) -> np.ndarray:
        return self.values[:, self.tasks.index(task)]

    def select(self, tasks: Sequence[TaskId]) -> LabelMatrix:
        idx = [self.tasks.index(t) for t in tasks]
        return LabelMatrix(self.values[:, idx], tuple(tasks))

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id"] + [t.column for t in self.tasks])
            for v, row in enumerate(self.values.tolist()):
                w.writerow([v] + row)

    def write_stats(self, path: str | Path) -> None:
        stats = {"num_nodes": int(len(self.values)), "positive_ratio": self.ratios}
        Path(path).write_text(json.dumps(stats, indent=2) + "\n")


def _simple_adjacency(g: DirectedMultigraph) -> sp.csr_matrix:
    """Binary adjacency with parallel edges collapsed and self-loops removed."""
    keep = g.src != g.dst
    a = sp.csr_matrix(
        (np.ones(int(keep.sum()), dtype=np.int64), (g.src[keep], g.dst[keep])),
        shape=(g.n, g.n),
    )
    a.data[:] = 1
    return a


def label_degree(g: DirectedMultigraph, direction: str = "in", threshold: int = 3) -> np.ndarray:
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    key = {"in": "deg_in", "out": "deg_out"}[direction]
    return (degrees(g)[key] > threshold).astype(np.uint8)


def label_fan(g: DirectedMultigraph, direction: str = "in", threshold: int = 3) -> np.ndarray:
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    key = {"in": "fan_in", "out": "fan_out"}[direction]
    return (degrees(g)[key] > threshold).astype(np.uint8)


def cycle_membership(g: DirectedMultigraph, max_len: int = MAX_CYCLE) -> np.ndarray:
    """``(max_len + 1, n)`` table: row k marks nodes lying on a simple k-cycle.

    Each cycle is found once, from its smallest node, by a depth-bounded DFS
    that only visits nodes larger than the start.
    """
    n = g.n
    out = np.zeros((max_len + 1, n), dtype=np.uint8)
    a = _simple_adjacency(g)
    succ = [a.indices[a.indptr[v]:a.indptr[v + 1]].tolist() for v in range(n)]
    for s in range(n):
        path = [s]
        on_path = {s}
        stack = [iter([w for w in succ[s] if w > s])]
        while stack:
            w = next(stack[-1], None)
            if w is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            path.append(w)
            on_path.add(w)
            depth = len(path)
            nxt = []
            for x in succ[w]:
                if x == s:
                    out[depth, path] = 1
                elif x > s and x not in on_path and depth < max_len:
                    nxt.append(x)
            stack.append(iter(nxt))
    return out


def label_cycles(g: DirectedMultigraph, k: int) -> np.ndarray:
    if not 2 <= k <= MAX_CYCLE:
        raise ValueError(f"cycle length must be in [2, {MAX_CYCLE}], got {k}")
    return cycle_membership(g, k)[k]


def label_scatter_gather(g: DirectedMultigraph) -> np.ndarray:
    """Sinks ``v`` with some source ``u != v`` reaching ``v`` through >= 2 intermediates."""
    a = _simple_adjacency(g)
    two_paths = (a @ a).tocoo()
    hit = (two_paths.data >= 2) & (two_paths.row != two_paths.col)
    out = np.zeros(g.n, dtype=np.uint8)
    out[two_paths.col[hit]] = 1
    return out


def label_biclique(g: DirectedMultigraph) -> np.ndarray:
    """Sinks of a directed K_{2,2}: some other sink shares >= 2 in-neighbours with ``v``."""
    a = _simple_adjacency(g)
    shared = (a.T @ a).tocoo()
    hit = (shared.data >= 2) & (shared.row != shared.col)
    out = np.zeros(g.n, dtype=np.uint8)
    out[shared.row[hit]] = 1
    return out


def label_all(
    g: DirectedMultigraph,
    tasks: Sequence[TaskId] = ALL_TASKS,
    degree_threshold: int = 3,
    fan_threshold: int = 3,
) -> LabelMatrix:
    cols: dict[TaskId, np.ndarray] = {}
    if any(TaskId.C2 <= t <= TaskId.C6 for t in tasks):
        kmax = max(int(t) - int(TaskId.C2) + 2 for t in tasks if TaskId.C2 <= t <= TaskId.C6)
        cyc = cycle_membership(g, kmax)
    deg = degrees(g)
    for t in tasks:
        if t == TaskId.DegIn:
            cols[t] = deg["deg_in"] > degree_threshold
        elif t == TaskId.DegOut:
            cols[t] = deg["deg_out"] > degree_threshold
        elif t == TaskId.FanIn:
            cols[t] = deg["fan_in"] > fan_threshold
        elif t == TaskId.FanOut:
            cols[t] = deg["fan_out"] > fan_threshold
        elif t == TaskId.ScatterGather:
            cols[t] = label_scatter_gather(g)
        elif t == TaskId.Biclique:
            cols[t] = label_biclique(g)
        else:
            cols[t] = cyc[int(t) - int(TaskId.C2) + 2]
    values = np.stack([np.asarray(cols[t], dtype=np.uint8) for t in tasks], axis=1) if tasks else (
        np.zeros((g.n, 0), dtype=np.uint8)
    )
    return LabelMatrix(values.reshape(g.n, len(tasks)), tuple(tasks))
