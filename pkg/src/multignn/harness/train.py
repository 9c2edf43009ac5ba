"""Experiment configuration, dataset assembly, training and evaluation."""
from __future__ import annotations

import hashlib
import json
import logging
import math
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..generator import GeneratorParams, generate_split_graphs
from ..graph import DirectedMultigraph, PortAssignment, assign_ports
from ..nn import Adam, GraphBatch, ModelConfig, MultiGNN, no_grad, weighted_bce_loss
from ..oracles import ALL_TASKS, LabelMatrix, TaskId, label_all
from .metrics import MetricsReport, minority_f1, minority_label
from .sampling import EgoIndex, build_ego_index, sample_ego

log = logging.getLogger(__name__)

CONFIG_VERSION = 1


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    """Everything that determines a training run.

    ``seeds`` are model seeds (initialisation and batch order). The three
    graphs (train/validation/test) come from ``generator`` and are shared
    by all seeds.
    """

    name: str = "experiment"
    generator: GeneratorParams = field(default_factory=lambda: GeneratorParams(4096, 6, 11.1, 0))
    tasks: list[str] = field(default_factory=lambda: [t.column for t in ALL_TASKS])
    model: ModelConfig = field(default_factory=ModelConfig)
    epochs: int = 100
    batch_size: int = 256
    lr: float = 3e-3
    seeds: list[int] = field(default_factory=lambda: [0])
    hops: int = 3
    neighbor_cap: int | None = None
    eval_every: int = 1
    patience: int = 20
    determinism: bool = True

    def __post_init__(self) -> None:
        if isinstance(self.generator, dict):
            self.generator = GeneratorParams(**self.generator)
        if isinstance(self.model, dict):
            self.model = ModelConfig(**self.model)
        self.tasks = [TaskId.parse(t).column for t in self.tasks]
        if not self.tasks:
            raise ValueError("at least one task is required")
        if self.model.num_outputs != len(self.tasks):
            self.model = replace(self.model, num_outputs=len(self.tasks))
        if self.epochs < 1 or self.batch_size < 1 or not self.lr > 0:
            raise ValueError("epochs, batch_size and lr must be positive")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.hops < 1:
            raise ValueError("hops must be >= 1")
        if self.model.ego_ids and self.hops > self.model.num_layers:
            warnings.warn(
                f"hops={self.hops} exceeds num_layers={self.model.num_layers}: "
                "the outer ring of each ego graph is never reached",
                stacklevel=2,
            )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["version"] = CONFIG_VERSION
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        d = dict(d)
        version = d.pop("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ValueError(f"unsupported config version {version}")
        return cls(**d)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(json.loads(Path(path).read_text()))


# -- data ----------------------------------------------------------------


@dataclass(eq=False)
class SplitData:
    """One graph prepared for training or evaluation."""

    graph: DirectedMultigraph
    labels: np.ndarray  # (n, tasks)
    ports: PortAssignment
    edge_features: np.ndarray  # model edge inputs (raw features, then ports if enabled)
    ego: EgoIndex | None = None


def edge_inputs(g: DirectedMultigraph, ports: PortAssignment, use_ports: bool) -> np.ndarray:
    cols = [g.edge_features]
    if use_ports:
        cols.append(np.stack([ports.in_port, ports.out_port], axis=1).astype(np.float64))
    return np.concatenate(cols, axis=1) if cols else np.zeros((g.m, 0))


def prepare(
    g: DirectedMultigraph,
    labels: np.ndarray,
    cfg: ModelConfig,
    hops: int,
    ports: PortAssignment | None = None,
) -> SplitData:
    ports = ports if ports is not None else assign_ports(g)
    ego = build_ego_index(g, hops) if cfg.ego_ids else None
    return SplitData(g, np.asarray(labels, dtype=np.float64), ports, edge_inputs(g, ports, cfg.ports), ego)


def build_datasets(exp: ExperimentConfig) -> tuple[SplitData, SplitData, SplitData]:
    """Three independent graphs from the generator (seeds ``seed``, ``seed+1``, ``seed+2``)."""
    tasks = [TaskId.parse(t) for t in exp.tasks]
    out = []
    for g in generate_split_graphs(exp.generator, 3):
        labels = label_all(g, tasks).values
        out.append(prepare(g, labels, exp.model, exp.hops))
    return tuple(out)


def node_inputs(n: int, width: int) -> np.ndarray:
    return np.ones((n, width))


def full_batch(data: SplitData, cfg: ModelConfig, targets: np.ndarray | None = None) -> GraphBatch:
    g = data.graph
    return GraphBatch(g.n, g.src, g.dst, node_inputs(g.n, cfg.node_in_dim), data.edge_features, targets)


def ego_batch(
    data: SplitData,
    cfg: ModelConfig,
    centers: np.ndarray,
    hops: int,
    neighbor_cap: int | None = None,
    seed: int = 0,
) -> GraphBatch:
    """Disjoint union of the centres' ego graphs; targets are the centre rows."""
    nodes, srcs, dsts, edges, offsets = [], [], [], [], []
    total = 0
    for c in np.asarray(centers).tolist():
        if neighbor_cap is None and data.ego is not None:
            ix = data.ego
            lo, hi = ix.node_ptr[c], ix.node_ptr[c + 1]
            elo, ehi = ix.edge_ptr[c], ix.edge_ptr[c + 1]
            nodes.append(ix.nodes[lo:hi])
            srcs.append(ix.local_src[elo:ehi] + total)
            dsts.append(ix.local_dst[elo:ehi] + total)
            edges.append(ix.edges[elo:ehi])
        else:
            sub = sample_ego(data.graph, c, hops, data.ports, neighbor_cap, seed)
            nodes.append(sub.nodes)
            srcs.append(sub.graph.src + total)
            dsts.append(sub.graph.dst + total)
            edges.append(sub.edges)
        offsets.append(total)
        total += len(nodes[-1])
    offsets = np.asarray(offsets, dtype=np.int64)
    flag = np.zeros((total, 1))
    flag[offsets] = 1.0
    feats = np.concatenate([node_inputs(total, cfg.node_in_dim), flag], axis=1)
    eid = np.concatenate(edges) if edges else np.zeros(0, dtype=np.int64)
    return GraphBatch(
        total,
        np.concatenate(srcs) if srcs else np.zeros(0, dtype=np.int64),
        np.concatenate(dsts) if dsts else np.zeros(0, dtype=np.int64),
        feats,
        data.edge_features[eid],
        offsets,
    )


def predict(
    model: MultiGNN,
    data: SplitData,
    nodes: np.ndarray,
    hops: int = 3,
    batch_size: int = 512,
    neighbor_cap: int | None = None,
) -> np.ndarray:
    """Logits ``(len(nodes), tasks)`` without recording gradients."""
    nodes = np.asarray(nodes, dtype=np.int64)
    with no_grad():
        if not model.cfg.ego_ids:
            return model(full_batch(data, model.cfg, nodes)).data
        parts = [
            model(ego_batch(data, model.cfg, nodes[i:i + batch_size], hops, neighbor_cap)).data
            for i in range(0, len(nodes), batch_size)
        ]
    return np.concatenate(parts) if parts else np.zeros((0, model.cfg.num_outputs))


def task_f1(labels: np.ndarray, logits: np.ndarray, tasks: list[str], minority: dict[str, int]) -> dict[str, float]:
    return {t: minority_f1(labels[:, j], logits[:, j], minority[t]) for j, t in enumerate(tasks)}


def evaluate(
    model: MultiGNN,
    graph: DirectedMultigraph | SplitData,
    labels: np.ndarray | LabelMatrix,
    mask: np.ndarray,
    tasks: list[str] | None = None,
    minority: dict[str, int] | None = None,
    hops: int = 3,
    neighbor_cap: int | None = None,
) -> MetricsReport:
    """Minority-class F1 per task on the nodes in ``mask``.

    ``mask`` is a boolean node mask or an array of node ids. ``minority``
    defaults to the rarer label among the masked nodes.
    """
    if isinstance(labels, LabelMatrix):
        tasks = tasks or [t.column for t in labels.tasks]
        labels = labels.values
    labels = np.asarray(labels, dtype=np.float64)
    tasks = tasks or [t.column for t in ALL_TASKS[: labels.shape[1]]]
    data = graph if isinstance(graph, SplitData) else prepare(graph, labels, model.cfg, hops)
    mask = np.asarray(mask)
    nodes = np.flatnonzero(mask) if mask.dtype == bool else mask.astype(np.int64)
    if len(nodes) == 0:
        raise ValueError("evaluation mask is empty")
    t0 = time.perf_counter()
    logits = predict(model, data, nodes, hops, neighbor_cap=neighbor_cap)
    y = labels[nodes]
    if minority is None:
        minority = {t: minority_label(y[:, j]) for j, t in enumerate(tasks)}
    scores = task_f1(y, logits, tasks, minority)
    return MetricsReport("eval", list(tasks), [scores], runtime_s=time.perf_counter() - t0)


# -- training --------------------------------------------------------------


@dataclass
class SeedResult:
    seed: int
    test_f1: dict[str, float]
    best_val: float
    best_epoch: int
    losses: list[float]
    state: dict[str, np.ndarray] | None
    error: str | None = None


@dataclass
class TrainResult:
    report: MetricsReport
    seeds: list[SeedResult]
    model_config: ModelConfig

    def best_model(self) -> MultiGNN:
        """The seed with the highest validation score, restored to its best state."""
        ok = [s for s in self.seeds if s.state is not None]
        if not ok:
            raise RuntimeError("no seed finished training")
        best = max(ok, key=lambda s: s.best_val)
        model = MultiGNN(self.model_config, best.seed)
        model.load_state_dict(best.state)
        return model


def _train_batch(
    exp: ExperimentConfig, data: SplitData, centers: np.ndarray, seed: int
) -> GraphBatch:
    cfg = exp.model
    if cfg.ego_ids:
        return ego_batch(data, cfg, centers, exp.hops, exp.neighbor_cap, seed)
    return full_batch(data, cfg, centers)


def train_seed(
    exp: ExperimentConfig,
    seed: int,
    data: tuple[SplitData, SplitData, SplitData],
    progress=None,
) -> SeedResult:
    """Train one model; keeps the parameters with the best validation mean F1."""
    train_d, val_d, test_d = data
    cfg = exp.model
    model = MultiGNN(cfg, seed)
    opt = Adam(model.parameters(), lr=exp.lr)
    rng = np.random.default_rng([seed, 1])
    minority = {t: minority_label(train_d.labels[:, j]) for j, t in enumerate(exp.tasks)}
    val_nodes = np.arange(val_d.graph.n)
    n = train_d.graph.n
    losses: list[float] = []
    best_val, best_epoch, best_state = -math.inf, -1, model.state_dict()
    since_best = 0
    for epoch in range(exp.epochs):
        order = rng.permutation(n)
        total = 0.0
        for i in range(0, n, exp.batch_size):
            centers = order[i:i + exp.batch_size]
            batch = _train_batch(exp, train_d, centers, seed)
            loss = weighted_bce_loss(model(batch), train_d.labels[centers], cfg.minority_class_weight)
            if not np.isfinite(loss.data):
                raise TrainingDiverged(f"seed {seed}: non-finite loss at epoch {epoch}")
            model.zero_grad()
            loss.backward()
            opt.step()
            total += float(loss.data) * len(centers)
        losses.append(total / n)
        if (epoch + 1) % exp.eval_every and epoch + 1 != exp.epochs:
            continue
        val_logits = predict(model, val_d, val_nodes, exp.hops, neighbor_cap=exp.neighbor_cap)
        score = float(np.mean(list(task_f1(val_d.labels, val_logits, exp.tasks, minority).values())))
        if progress:
            progress(f"seed {seed} epoch {epoch + 1}: loss {losses[-1]:.4f} val-F1 {score:.4f}")
        if score > best_val:
            best_val, best_epoch, best_state = score, epoch, model.state_dict()
            since_best = 0
        else:
            since_best += exp.eval_every
            if since_best >= exp.patience:
                break
    model.load_state_dict(best_state)
    test_logits = predict(model, test_d, np.arange(test_d.graph.n), exp.hops, neighbor_cap=exp.neighbor_cap)
    test = task_f1(test_d.labels, test_logits, exp.tasks, minority)
    return SeedResult(seed, test, best_val, best_epoch, losses, best_state)


def train(
    exp: ExperimentConfig,
    data: tuple[SplitData, SplitData, SplitData] | None = None,
    progress=None,
) -> TrainResult:
    """Train one model per seed and report test F1 mean and std over seeds.

    A seed whose loss becomes non-finite is dropped from the aggregate and
    listed under ``failures``.
    """
    t0 = time.perf_counter()
    data = data if data is not None else build_datasets(exp)
    results, per_seed, curves, failures = [], [], [], []
    for seed in exp.seeds:
        try:
            res = train_seed(exp, seed, data, progress)
        except (TrainingDiverged, FloatingPointError) as err:
            failures.append(str(err))
            results.append(SeedResult(seed, {}, -math.inf, -1, [], None, str(err)))
            continue
        results.append(res)
        per_seed.append(res.test_f1)
        curves.append(res.losses)
    report = MetricsReport(
        exp.name, list(exp.tasks), per_seed, curves, time.perf_counter() - t0, failures, exp.hash()
    )
    return TrainResult(report, results, exp.model)
