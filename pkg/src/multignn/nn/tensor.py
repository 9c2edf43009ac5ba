"""A small array-level reverse-mode differentiation engine.

Each :class:`Tensor` holds a float64 array and, when it was produced by an
operation on tensors that require gradients, a closure that pushes its
gradient back to its parents. :meth:`Tensor.backward` walks the recorded tape
in reverse topological order.

Graph operations (row gathers, segment sums and segment maxima) take a
:class:`Segments` index, which caches the sparse scatter matrix and the
sorted layout needed for the max reduction.
"""
from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

# Non-smooth ops append their active pattern here while tracing is on, so a
# finite-difference checker can tell when a perturbation crossed a kink.
_kink_trace: list[np.ndarray] | None = None


_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Evaluate without recording the tape."""
    global _grad_enabled
    prev, _grad_enabled = _grad_enabled, False
    try:
        yield
    finally:
        _grad_enabled = prev


@contextlib.contextmanager
def trace_kinks():
    global _kink_trace
    prev, _kink_trace = _kink_trace, []
    try:
        yield _kink_trace
    finally:
        _kink_trace = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        _parents: tuple[Tensor, ...] = (),
        _backward: Callable[[np.ndarray], None] | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward = _backward

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: np.ndarray | None = None) -> None:
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a seed needs a scalar tensor")
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        grads: dict[int, np.ndarray] = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:  # leaf
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                grads[key] = pg if key not in grads else grads[key] + pg

    # arithmetic -----------------------------------------------------------

    def __add__(self, other) -> Tensor:
        other = as_tensor(other)
        a_shape, b_shape = self.shape, other.shape
        return _op(
            self.data + other.data,
            (self, other),
            lambda g: (_unbroadcast(g, a_shape), _unbroadcast(g, b_shape)),
        )

    __radd__ = __add__

    def __sub__(self, other) -> Tensor:
        return self + (-as_tensor(other))

    def __rsub__(self, other) -> Tensor:
        return as_tensor(other) + (-self)

    def __neg__(self) -> Tensor:
        return _op(-self.data, (self,), lambda g: (-g,))

    def __mul__(self, other) -> Tensor:
        other = as_tensor(other)
        a, b = self.data, other.data
        return _op(
            a * b,
            (self, other),
            lambda g: (_unbroadcast(g * b, a.shape), _unbroadcast(g * a, b.shape)),
        )

    __rmul__ = __mul__

    def __matmul__(self, other: Tensor) -> Tensor:
        a, b = self.data, other.data
        return _op(a @ b, (self, other), lambda g: (g @ b.T, a.T @ g))

    def __pow__(self, k: float) -> Tensor:
        a = self.data
        return _op(a**k, (self,), lambda g: (g * k * a ** (k - 1),))

    def sum(self) -> Tensor:
        shape = self.shape
        return _op(self.data.sum(), (self,), lambda g: (np.broadcast_to(g, shape).copy(),))

    def mean(self) -> Tensor:
        size = max(self.data.size, 1)
        shape = self.shape
        return _op(
            self.data.mean() if self.data.size else np.float64(0.0),
            (self,),
            lambda g: (np.full(shape, g / size),),
        )

    def relu(self) -> Tensor:
        mask = self.data > 0
        if _kink_trace is not None:
            _kink_trace.append(mask)
        return _op(np.where(mask, self.data, 0.0), (self,), lambda g: (g * mask,))

    def softplus(self) -> Tensor:
        x = self.data
        sig = _sigmoid(x)
        return _op(np.logaddexp(0.0, x), (self,), lambda g: (g * sig,))

    def sigmoid(self) -> Tensor:
        s = _sigmoid(self.data)
        return _op(s, (self,), lambda g: (g * s * (1 - s),))

    def __getitem__(self, idx) -> Tensor:
        shape = self.shape

        def back(g):
            out = np.zeros(shape)
            np.add.at(out, idx, g)
            return (out,)

        return _op(self.data[idx], (self,), back)


def _op(data, parents: tuple[Tensor, ...], backward) -> Tensor:
    needs = _grad_enabled and any(p.requires_grad for p in parents)
    return Tensor(data, needs, parents if needs else (), backward if needs else None)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data) -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def back(g):
        return tuple(
            np.take(g, np.arange(lo, hi), axis=axis) for lo, hi in zip(bounds[:-1], bounds[1:])
        )

    return _op(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), back)


# -- graph operations ------------------------------------------------------


class Segments:
    """Assignment of ``m`` rows (edges) to ``num_segments`` groups (nodes)."""

    def __init__(self, index: np.ndarray, num_segments: int):
        index = np.asarray(index, dtype=np.int64)
        self.index = index
        self.num_segments = num_segments
        m = len(index)
        self.scatter = sp.csr_matrix(
            (np.ones(m), (index, np.arange(m))), shape=(num_segments, m)
        )
        self.gather = self.scatter.T.tocsr()
        self.order = np.argsort(index, kind="stable")
        counts = np.bincount(index, minlength=num_segments)
        self.nonempty = np.flatnonzero(counts)
        self.counts = counts[self.nonempty]
        self.starts = np.concatenate([[0], np.cumsum(self.counts)[:-1]]).astype(np.int64)

    def __len__(self) -> int:
        return len(self.index)


def gather_rows(x: Tensor, seg: Segments) -> Tensor:
    """Row ``e`` of the result is ``x[seg.index[e]]``."""
    return _op(x.data[seg.index], (x,), lambda g: (seg.scatter @ g,))


def segment_sum(x: Tensor, seg: Segments) -> Tensor:
    return _op(seg.scatter @ x.data, (x,), lambda g: (seg.gather @ g,))


def segment_max(x: Tensor, seg: Segments) -> Tensor:
    """Column-wise maximum per segment; empty segments give 0.

    The gradient of each output entry goes to a single row: the maximiser
    with the smallest row index when there are ties.
    """
    m, width = x.shape
    out = np.zeros((seg.num_segments, width))
    if m == 0 or width == 0:
        return _op(out, (x,), lambda g: (np.zeros((m, width)),))
    xs = x.data[seg.order]
    best = np.maximum.reduceat(xs, seg.starts, axis=0)
    hit = xs == np.repeat(best, seg.counts, axis=0)
    pos = np.where(hit, np.arange(m)[:, None], m)
    first = np.minimum.reduceat(pos, seg.starts, axis=0)
    argmax = seg.order[first]  # (nonempty, width) row ids
    out[seg.nonempty] = best
    if _kink_trace is not None:
        _kink_trace.append(argmax)
    cols = np.broadcast_to(np.arange(width), argmax.shape)

    def back(g):
        gx = np.zeros((m, width))
        gx[argmax, cols] = g[seg.nonempty]
        return (gx,)

    return _op(out, (x,), back)


def edge_messages(hw: Tensor, sender: Segments, e: Tensor, we: Tensor, b: Tensor) -> Tensor:
    """``relu(hw[sender] + e @ we + b)`` as a single tape entry.

    Same values and gradients as composing the primitives, without the
    edge-sized intermediates.
    """
    pre = hw.data[sender.index]
    if e.shape[1]:
        pre += e.data @ we.data
    pre += b.data
    mask = pre > 0
    if _kink_trace is not None:
        _kink_trace.append(mask)
    np.maximum(pre, 0.0, out=pre)

    def back(g):
        gm = g * mask
        return (
            sender.scatter @ gm,
            gm @ we.data.T if e.requires_grad else None,
            e.data.T @ gm,
            gm.sum(axis=0),
        )

    return _op(pre, (hw, e, we, b), back)


def aggregate(x: Tensor, seg: Segments, how: str) -> Tensor:
    if how == "sum":
        return segment_sum(x, seg)
    if how == "max":
        return segment_max(x, seg)
    raise ValueError(f"unknown aggregation {how!r}")


def weighted_bce_loss(logits: Tensor, labels: np.ndarray, minority_class_weight: float = 1.0) -> Tensor:
    """Mean of ``w*y*softplus(-z) + (1-y)*softplus(z)`` over all entries."""
    z = logits.data
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != z.shape:
        raise ValueError(f"label shape {y.shape} does not match logits {z.shape}")
    if not minority_class_weight > 0:
        raise ValueError("minority_class_weight must be positive")
    if np.isnan(z).any() or np.isnan(y).any():
        raise ValueError("NaN in loss inputs")
    w = minority_class_weight
    size = max(z.size, 1)
    value = (w * y * np.logaddexp(0.0, -z) + (1 - y) * np.logaddexp(0.0, z)).sum() / size
    sig = _sigmoid(z)

    def back(g):
        return (g * (-w * y * (1 - sig) + (1 - y) * sig) / size,)

    return _op(np.float64(value), (logits,), back)


def zero_grads(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = None
