from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


def confusion(y_true: np.ndarray, y_pred: np.ndarray, positive: int = 1) -> tuple[int, int, int, int]:
    """``(tp, fp, fn, tn)`` treating ``positive`` as the class of interest."""
    t = np.asarray(y_true) == positive
    p = np.asarray(y_pred) == positive
    return int((t & p).sum()), int((~t & p).sum()), int((t & ~p).sum()), int((~t & ~p).sum())


def f1_score(y_true: np.ndarray, y_pred: np.ndarray, positive: int = 1) -> float:
    tp, fp, fn, _ = confusion(y_true, y_pred, positive)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def minority_label(y: np.ndarray) -> int:
    """The rarer of {0, 1}; label 1 on an exact tie."""
    return 1 if np.asarray(y).mean() <= 0.5 else 0


def minority_f1(y_true: np.ndarray, logits: np.ndarray, minority: int) -> float:
    """F1 of the minority class with predictions ``sigmoid(logit) > 0.5``."""
    pred = (np.asarray(logits) > 0).astype(int)
    return f1_score(np.asarray(y_true).astype(int), pred, positive=minority)


@dataclass
class MetricsReport:
    """Per-task minority-class F1 aggregated over seeds."""

    name: str
    tasks: list[str]
    per_seed: list[dict[str, float]] = field(default_factory=list)  # one {task: f1} per seed
    loss_curves: list[list[float]] = field(default_factory=list)
    runtime_s: float = 0.0
    failures: list[str] = field(default_factory=list)
    config_hash: str = ""

    @property
    def mean(self) -> dict[str, float]:
        if not self.per_seed:
            return {t: float("nan") for t in self.tasks}
        return {t: float(np.mean([s[t] for s in self.per_seed])) for t in self.tasks}

    @property
    def std(self) -> dict[str, float]:
        if not self.per_seed:
            return {t: float("nan") for t in self.tasks}
        return {t: float(np.std([s[t] for s in self.per_seed])) for t in self.tasks}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean"], d["std"] = self.mean, self.std
        return d

    @classmethod
    def from_dict(cls, d: dict) -> MetricsReport:
        keys = {"name", "tasks", "per_seed", "loss_curves", "runtime_s", "failures", "config_hash"}
        return cls(**{k: v for k, v in d.items() if k in keys})


def export_metrics(reports: Sequence[MetricsReport], path: str | Path, fmt: str = "csv") -> None:
    """Write reports as a variant-by-task table (CSV) or lossless JSON."""
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps([r.to_dict() for r in reports], indent=2) + "\n")
        return
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    tasks = list(reports[0].tasks) if reports else []
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model"] + tasks)
        for r in reports:
            mean = r.mean
            w.writerow([r.name] + [f"{mean[t]:.4f}" for t in tasks])


def load_metrics(path: str | Path) -> list[MetricsReport]:
    return [MetricsReport.from_dict(d) for d in json.loads(Path(path).read_text())]
