"""GIN-style message passing with edge features, reverse MP, ports and ego IDs."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from .tensor import Segments, Tensor, aggregate, concat, edge_messages, parameter


class Module:
    """Parameter container; parameters are found by walking attributes."""

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, value in vars(self).items():
            yield from _walk(value, f"{prefix}{name}")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: p.data.copy() for k, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = dict(self.named_parameters())
        if set(params) != set(state):
            missing = sorted(set(params) ^ set(state))
            raise KeyError(f"parameter mismatch: {missing[:5]}")
        for k, p in params.items():
            arr = np.asarray(state[k], dtype=np.float64).reshape(p.shape)
            p.data = arr.copy()

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None


def _walk(value, path: str):
    if isinstance(value, Tensor):
        if value.requires_grad:
            yield path, value
    elif isinstance(value, Module):
        yield from value.named_parameters(path + ".")
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            yield from _walk(item, f"{path}.{i}")


def _init(rng: np.random.Generator, fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
    bound = np.sqrt(6.0 / max(fan_in, 1))  # He-uniform, suits ReLU
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.weight = parameter(_init(rng, in_dim, (in_dim, out_dim)))
        self.bias = parameter(np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias


class MLP(Module):
    """Linear layers with ReLU in between (none after the last)."""

    def __init__(self, dims: list[int], rng: np.random.Generator):
        self.layers = [Linear(a, b, rng) for a, b in zip(dims[:-1], dims[1:])]

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = x.relu()
        return x


@dataclass
class GraphBatch:
    """Arrays a forward pass needs: one graph or a disjoint union of ego graphs."""

    num_nodes: int
    src: np.ndarray
    dst: np.ndarray
    node_features: np.ndarray
    edge_features: np.ndarray
    targets: np.ndarray | None = None  # node rows (or edge rows) that are read out
    by_src: Segments = field(init=False, repr=False)
    by_dst: Segments = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.by_src = Segments(self.src, self.num_nodes)
        self.by_dst = Segments(self.dst, self.num_nodes)

    @property
    def num_edges(self) -> int:
        return len(self.src)


class MessageDirection(Module):
    """One direction of message passing: ``ReLU(W_h h(u) + W_e e + b)``.

    The linear map of ``concat(h(u), e)`` is evaluated as ``(h W_h)[u] + e W_e``
    so the node term is computed once per node instead of once per edge.
    """

    def __init__(self, node_dim: int, edge_dim: int, hidden: int, rng: np.random.Generator):
        fan = node_dim + edge_dim
        self.node_weight = parameter(_init(rng, fan, (node_dim, hidden)))
        self.edge_weight = parameter(_init(rng, fan, (edge_dim, hidden)))
        self.bias = parameter(np.zeros(hidden))

    def messages(self, h: Tensor, edge_feats: Tensor, sender: Segments) -> Tensor:
        return edge_messages(h @ self.node_weight, sender, edge_feats, self.edge_weight, self.bias)


@dataclass
class GnnLayerConfig:
    hidden_dim: int
    aggregation: str = "sum"
    use_edge_features: bool = True
    reverse_mp: bool = False
    update_layers: int = 2

    def __post_init__(self) -> None:
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1")
        if self.aggregation not in ("sum", "max"):
            raise ValueError(f"aggregation must be 'sum' or 'max', got {self.aggregation!r}")


class MPLayer(Module):
    """``h' = MLP_upd(concat(h, a_in[, a_out]))`` with separately parameterised directions."""

    def __init__(self, cfg: GnnLayerConfig, node_dim: int, edge_dim: int, rng: np.random.Generator):
        self.cfg = cfg
        self.edge_dim = edge_dim if cfg.use_edge_features else 0
        self.msg_in = MessageDirection(node_dim, self.edge_dim, cfg.hidden_dim, rng)
        self.msg_out = (
            MessageDirection(node_dim, self.edge_dim, cfg.hidden_dim, rng) if cfg.reverse_mp else None
        )
        width = node_dim + cfg.hidden_dim * (2 if cfg.reverse_mp else 1)
        dims = [width] + [cfg.hidden_dim] * cfg.update_layers
        self.update = MLP(dims, rng)

    def aggregates(self, h: Tensor, edge_feats: Tensor, batch: GraphBatch) -> list[Tensor]:
        e = edge_feats if self.edge_dim else Tensor(np.zeros((batch.num_edges, 0)))
        if e.shape[1] != self.edge_dim:
            raise ValueError(f"expected {self.edge_dim} edge features, got {e.shape[1]}")
        agg = self.cfg.aggregation
        # incoming: edge (u, v) carries h(u) to v
        out = [aggregate(self.msg_in.messages(h, e, batch.by_src), batch.by_dst, agg)]
        if self.msg_out is not None:
            # outgoing: edge (v, u) carries h(u) back to v
            out.append(aggregate(self.msg_out.messages(h, e, batch.by_dst), batch.by_src, agg))
        return out

    def __call__(self, h: Tensor, edge_feats: Tensor, batch: GraphBatch) -> Tensor:
        if h.shape[0] != batch.num_nodes:
            raise ValueError(f"node state has {h.shape[0]} rows, batch has {batch.num_nodes} nodes")
        return self.update(concat([h] + self.aggregates(h, edge_feats, batch), axis=1))


def mp_forward(layer: MPLayer, h: Tensor, edge_feats, batch: GraphBatch) -> Tensor:
    return layer(as_input(h), as_input(edge_feats), batch)


def as_input(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


@dataclass
class ModelConfig:
    num_layers: int = 6
    hidden_dim: int = 32
    reverse_mp: bool = False
    ports: bool = False
    ego_ids: bool = False
    readout: str = "node"
    aggregation: str = "sum"
    minority_class_weight: float = 1.0
    node_in_dim: int = 1
    edge_in_dim: int = 0
    num_outputs: int = 11
    update_layers: int = 2
    residual: bool = True

    def __post_init__(self) -> None:
        if self.readout not in ("node", "edge"):
            raise ValueError(f"readout must be 'node' or 'edge', got {self.readout!r}")
        if self.num_layers < 1 or self.hidden_dim < 1:
            raise ValueError("num_layers and hidden_dim must be >= 1")
        if not self.minority_class_weight > 0:
            raise ValueError("minority_class_weight must be positive")

    @property
    def node_input_width(self) -> int:
        return self.node_in_dim + (1 if self.ego_ids else 0)

    @property
    def edge_input_width(self) -> int:
        return self.edge_in_dim + (2 if self.ports else 0)

    def to_dict(self) -> dict:
        return asdict(self)


class MultiGNN(Module):
    """Input encoder, ``num_layers`` message-passing layers and a readout MLP.

    With ``residual`` each layer's output is averaged with its input
    after a ReLU: ``h <- (h + relu(layer(h))) / 2``.
    """

    def __init__(self, cfg: ModelConfig, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.cfg = cfg
        hidden = cfg.hidden_dim
        self.encoder = Linear(cfg.node_input_width, hidden, rng)
        layer_cfg = GnnLayerConfig(
            hidden, cfg.aggregation, cfg.edge_input_width > 0, cfg.reverse_mp, cfg.update_layers
        )
        self.layers = [MPLayer(layer_cfg, hidden, cfg.edge_input_width, rng) for _ in range(cfg.num_layers)]
        if cfg.readout == "node":
            self.head = MLP([hidden, hidden, cfg.num_outputs], rng)
            self.edge_embed = None
        else:
            self.edge_embed = Linear(max(cfg.edge_input_width, 1), hidden, rng)
            self.head = MLP([3 * hidden, hidden, cfg.num_outputs], rng)

    def embed(self, batch: GraphBatch) -> Tensor:
        h = self.encoder(Tensor(batch.node_features))
        e = Tensor(batch.edge_features)
        for layer in self.layers:
            new = layer(h, e, batch).relu()
            h = (h + new) * 0.5 if self.cfg.residual else new
        return h

    def __call__(self, batch: GraphBatch) -> Tensor:
        h = self.embed(batch)
        if self.cfg.readout == "node":
            return readout_node(self, h, batch.targets)
        return readout_edge(self, h, batch, batch.targets)


def readout_node(model: MultiGNN, h: Tensor, nodes: np.ndarray | None = None) -> Tensor:
    rows = h if nodes is None else h[np.asarray(nodes)]
    return model.head(rows)


def readout_edge(model: MultiGNN, h: Tensor, batch: GraphBatch, edges: np.ndarray | None = None) -> Tensor:
    idx = np.arange(batch.num_edges) if edges is None else np.asarray(edges)
    feats = batch.edge_features if batch.edge_features.shape[1] else np.ones((batch.num_edges, 1))
    e = model.edge_embed(Tensor(feats[idx]))
    return model.head(concat([h[batch.src[idx]], h[batch.dst[idx]], e], axis=1))
