"""Versioned JSON checkpoints: config block plus flat parameter arrays."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .layers import ModelConfig, MultiGNN

FORMAT_VERSION = 1


def to_dict(model: MultiGNN, extra: dict | None = None) -> dict:
    return {
        "format": "multignn-checkpoint",
        "version": FORMAT_VERSION,
        "config": model.cfg.to_dict(),
        "params": {
            path: {"shape": list(p.shape), "data": p.data.ravel().tolist()}
            for path, p in model.named_parameters()
        },
        "extra": extra or {},
    }


def from_dict(doc: dict) -> MultiGNN:
    if doc.get("format") != "multignn-checkpoint":
        raise ValueError("not a multignn checkpoint")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')}")
    model = MultiGNN(ModelConfig(**doc["config"]))
    model.load_state_dict(
        {k: np.array(v["data"], dtype=np.float64).reshape(v["shape"]) for k, v in doc["params"].items()}
    )
    return model


def save(model: MultiGNN, path: str | Path, extra: dict | None = None) -> None:
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(to_dict(model, extra)))


def load(path: str | Path) -> tuple[MultiGNN, dict]:
    doc = json.loads(Path(path).read_text())
    return from_dict(doc), doc.get("extra", {})
