"""Random circulant multigraphs.

Nodes sit on a ring. Each edge draws its tail uniformly and its head from a
normal distribution centred on the tail (standard deviation ``r``), rounded
half-up and wrapped around the ring. Self-loops are redrawn. Edge timestamps
are the generation index.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .graph import DirectedMultigraph, from_arrays, write_edge_csv

PRNG_NAME = f"numpy.random.PCG64/Generator.normal(ziggurat)/numpy-{np.__version__}"


@dataclass(frozen=True)
class GeneratorParams:
    n: int
    d: float
    r: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if not self.r > 0:
            raise ValueError(f"r must be positive, got {self.r}")

    @property
    def num_edges(self) -> int:
        return int(np.floor(self.n * self.d / 2))


def random_circulant(params: GeneratorParams) -> DirectedMultigraph:
    n, m = params.n, params.num_edges
    rng = np.random.Generator(np.random.PCG64(params.seed))
    tail = rng.integers(0, n, size=m, dtype=np.int64)
    head = np.empty(m, dtype=np.int64)
    todo = np.arange(m)
    while len(todo):
        x = rng.normal(loc=tail[todo].astype(np.float64), scale=params.r)
        head[todo] = np.mod(np.floor(x + 0.5).astype(np.int64), n)
        todo = todo[head[todo] == tail[todo]]
    return from_arrays(n, tail, head, np.arange(m, dtype=np.int64))


def derived_params(params: GeneratorParams, index: int) -> GeneratorParams:
    return GeneratorParams(params.n, params.d, params.r, params.seed + index)


def generate_split_graphs(params: GeneratorParams, k: int) -> list[DirectedMultigraph]:
    """``k`` independent graphs, one per dataset split, seeded ``seed + i``."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return [random_circulant(derived_params(params, i)) for i in range(k)]


def ring_distance(g: DirectedMultigraph) -> np.ndarray:
    diff = np.abs(g.src - g.dst)
    return np.minimum(diff, g.n - diff)


def sidecar(params: GeneratorParams, g: DirectedMultigraph) -> dict:
    return {
        "generator": "random_circulant",
        "params": asdict(params),
        "prng": PRNG_NAME,
        "rounding": "floor(x + 0.5) mod n",
        "self_loops": "rejected and redrawn",
        "num_nodes": g.n,
        "num_edges": g.m,
    }


def write_generated(params: GeneratorParams, g: DirectedMultigraph, path: str | Path) -> Path:
    """Write the edge CSV plus a ``.json`` sidecar next to it; returns the sidecar path."""
    path = Path(path)
    write_edge_csv(g, path)
    meta = path.with_suffix(".json")
    meta.write_text(json.dumps(sidecar(params, g), indent=2, sort_keys=True) + "\n")
    return meta
