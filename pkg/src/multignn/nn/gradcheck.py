from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import GraphBatch, Module
from .tensor import trace_kinks, weighted_bce_loss


class NonFiniteGradient(FloatingPointError):
    def __init__(self, path: str):
        super().__init__(f"non-finite gradient in parameter {path}")
        self.path = path


def backward(loss, model: Module) -> dict[str, np.ndarray]:
    """Run reverse mode from ``loss`` and return gradients keyed by parameter path."""
    model.zero_grad()
    loss.backward()
    grads = {}
    for path, p in model.named_parameters():
        g = p.grad if p.grad is not None else np.zeros_like(p.data)
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient(path)
        grads[path] = g
    return grads


@dataclass
class GradCheckReport:
    max_rel_error: float
    worst: str
    checked: int
    kink_retries: int
    skipped: int

    def __str__(self) -> str:
        return (
            f"max_rel_err={self.max_rel_error:.3e} at {self.worst} "
            f"(checked={self.checked}, kink_retries={self.kink_retries}, skipped={self.skipped})"
        )


def _same_pattern(a: list[np.ndarray], b: list[np.ndarray]) -> bool:
    return len(a) == len(b) and all(x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a, b))


def grad_check(
    model: Module,
    batch: GraphBatch,
    labels: np.ndarray,
    eps: float = 1e-3,
    minority_class_weight: float = 1.0,
    max_params: int = 10_000,
    seed: int = 0,
    atol: float = 1e-8,
) -> GradCheckReport:
    """Compare reverse-mode gradients with central differences.

    The numeric derivative uses the fourth-order central stencil at
    ``x +- eps`` and ``x +- 2 eps``. Every parameter entry is checked (a
    random subsample of ``max_params`` entries for larger models). Central differences are only meaningful where
    the loss is smooth across the stencil: when a perturbation on the stencil
    changes a ReLU mask or a max-aggregation winner, the step is shrunk by 10x
    (up to three times) and the entry is skipped if it still straddles a kink.
    Relative error is ``|a - f| / max(|a|, |f|, atol)``.
    """

    def loss_value() -> tuple[float, list[np.ndarray]]:
        with trace_kinks() as kinks:
            val = float(weighted_bce_loss(model(batch), labels, minority_class_weight).data)
        return val, list(kinks)

    loss = weighted_bce_loss(model(batch), labels, minority_class_weight)
    analytic = backward(loss, model)
    _, base_pattern = loss_value()

    entries = [(path, idx) for path, p in model.named_parameters() for idx in np.ndindex(p.shape)]
    if len(entries) > max_params:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(entries), size=max_params, replace=False)
        entries = [entries[i] for i in sorted(pick)]
    params = dict(model.named_parameters())

    worst, worst_path = 0.0, ""
    retries = skipped = checked = 0
    for path, idx in entries:
        p = params[path]
        orig = p.data[idx]
        step = eps
        numeric = None
        for _ in range(4):
            values, smooth = {}, True
            for k in (-2, -1, 1, 2):
                p.data[idx] = orig + k * step
                values[k], pattern = loss_value()
                smooth = smooth and _same_pattern(pattern, base_pattern)
            p.data[idx] = orig
            if smooth:
                numeric = (
                    8 * (values[1] - values[-1]) - (values[2] - values[-2])
                ) / (12 * step)
                break
            retries += 1
            step /= 10
        if numeric is None:
            skipped += 1
            continue
        checked += 1
        a = float(analytic[path][idx])
        rel = abs(a - numeric) / max(abs(a), abs(numeric), atol)
        if rel > worst:
            worst, worst_path = rel, f"{path}{list(idx)}"
    return GradCheckReport(worst, worst_path, checked, retries, skipped)
