"""Dense float64 tensors with reverse-mode automatic differentiation.

Every trainable operation in the package runs on :class:`Tensor`. The graph
is built eagerly; calling ``backward()`` on a scalar walks it in reverse
topological order and accumulates gradients into ``.grad`` (float64 ndarray).

Numerical stability rules: softmax and cross-entropy subtract the running
max before exponentiating, ``exp`` clamps its argument at the float64
overflow threshold, and the ReLU subgradient at exactly 0 is 0 so gradient
checks are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionError, NumericError

# log(float64 max); exp() clamps here so finite inputs stay finite
_EXP_MAX = 709.0


def _as_f64(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float64)


class Tensor:
    """A float64 ndarray plus the bookkeeping for reverse-mode gradients."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, values, requires_grad: bool = False):
        data = _as_f64(values)
        if not np.isfinite(data).all():
            raise NumericError("tensor initialized with non-finite values")
        self.data = data
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @classmethod
    def _from_op(cls, data: np.ndarray, parents: tuple["Tensor", ...], backward) -> "Tensor":
        # Fast path for op outputs: skip the finiteness scan (ops preserve
        # finiteness analytically) and wire the graph edges.
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.requires_grad = any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = parents
            out._backward = backward
        else:
            out._parents = ()
            out._backward = None
        return out

    # -- introspection -----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- autodiff ----------------------------------------------------------

    def _accum(self, g: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
        else:
            self.grad += g

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every reachable leaf's ``.grad``.

        Only defined for scalar outputs (loss values).
        """
        if self.data.size != 1:
            raise DimensionError(
                f"backward() requires a scalar, got shape {self.data.shape}"
            )
        if not np.isfinite(self.data).all():
            raise NumericError("backward() called on a non-finite value")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic (numpy broadcasting; strict-shape wrappers below) ------

    def __add__(self, other) -> "Tensor":
        other = other if isinstance(other, Tensor) else Tensor(other)
        data = _broadcast_op(np.add, self.data, other.data)

        def backward(g):
            self._accum(_unbroadcast(g, self.data.shape))
            other._accum(_unbroadcast(g, other.data.shape))

        return Tensor._from_op(data, (self, other), backward)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        def backward(g):
            self._accum(-g)

        return Tensor._from_op(-self.data, (self,), backward)

    def __sub__(self, other) -> "Tensor":
        other = other if isinstance(other, Tensor) else Tensor(other)
        return self + (-other)

    def __rsub__(self, other) -> "Tensor":
        return (-self) + other

    def __mul__(self, other) -> "Tensor":
        other = other if isinstance(other, Tensor) else Tensor(other)
        data = _broadcast_op(np.multiply, self.data, other.data)
        a, b = self.data, other.data

        def backward(g):
            self._accum(_unbroadcast(g * b, a.shape))
            other._accum(_unbroadcast(g * a, b.shape))

        return Tensor._from_op(data, (self, other), backward)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = other if isinstance(other, Tensor) else Tensor(other)
        data = _broadcast_op(np.divide, self.data, other.data)
        a, b = self.data, other.data

        def backward(g):
            self._accum(_unbroadcast(g / b, a.shape))
            other._accum(_unbroadcast(-g * a / (b * b), b.shape))

        return Tensor._from_op(data, (self, other), backward)

    def __matmul__(self, other) -> "Tensor":
        return matmul(self, other)

    # -- shape ops ----------------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        old = self.data.shape
        data = self.data.reshape(*shape)

        def backward(g):
            self._accum(g.reshape(old))

        return Tensor._from_op(data, (self,), backward)

    def transpose(self) -> "Tensor":
        if self.data.ndim != 2:
            raise DimensionError(f"transpose() needs a matrix, got shape {self.data.shape}")

        def backward(g):
            self._accum(np.ascontiguousarray(g.T))

        return Tensor._from_op(np.ascontiguousarray(self.data.T), (self,), backward)

    @property
    def T(self) -> "Tensor":
        return self.transpose()

    def __getitem__(self, idx) -> "Tensor":
        data = self.data[idx]
        shape = self.data.shape

        def backward(g):
            full = np.zeros(shape, dtype=np.float64)
            full[idx] = g
            self._accum(full)

        return Tensor._from_op(np.ascontiguousarray(data), (self,), backward)

    # -- reductions ----------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        data = np.asarray(self.data.sum(axis=axis, keepdims=keepdims), dtype=np.float64)
        shape = self.data.shape

        def backward(g):
            if axis is None:
                self._accum(np.broadcast_to(g, shape).astype(np.float64))
            else:
                gg = g if keepdims else np.expand_dims(g, axis)
                self._accum(np.broadcast_to(gg, shape).astype(np.float64))

        return Tensor._from_op(np.asarray(data, dtype=np.float64), (self,), backward)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)


def _broadcast_op(fn, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return fn(a, b)
    except ValueError as exc:
        raise DimensionError(
            f"operands not broadcastable: {a.shape} vs {b.shape}"
        ) from exc


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    for _ in range(extra):
        g = g.sum(axis=0)
    for i, d in enumerate(shape):
        if d == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with the standard 1-D/2-D numpy semantics.

    Raises :class:`DimensionError` naming both shapes when the inner
    dimensions disagree.
    """
    a = a if isinstance(a, Tensor) else Tensor(a)
    b = b if isinstance(b, Tensor) else Tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim not in (1, 2) or bd.ndim not in (1, 2):
        raise DimensionError(f"matmul supports 1-D/2-D operands, got {ad.shape} @ {bd.shape}")
    if ad.shape[-1] != bd.shape[0]:
        raise DimensionError(f"matmul inner dimensions disagree: {ad.shape} @ {bd.shape}")
    data = ad @ bd

    def backward(g):
        if ad.ndim == 2 and bd.ndim == 2:
            a._accum(g @ bd.T)
            b._accum(ad.T @ g)
        elif ad.ndim == 2 and bd.ndim == 1:
            a._accum(np.outer(g, bd))
            b._accum(ad.T @ g)
        elif ad.ndim == 1 and bd.ndim == 2:
            a._accum(g @ bd.T)
            b._accum(np.outer(ad, g))
        else:  # 1-D @ 1-D -> scalar
            a._accum(g * bd)
            b._accum(g * ad)

    return Tensor._from_op(np.asarray(data, dtype=np.float64), (a, b), backward)


def _require_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.data.shape != b.data.shape:
        raise DimensionError(f"{op} needs equal shapes, got {a.data.shape} vs {b.data.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    """Pointwise sum of two equally shaped tensors."""
    _require_same_shape(a, b, "add")
    return a + b


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    """Pointwise product of two equally shaped tensors."""
    _require_same_shape(a, b, "hadamard")
    return a * b


def scale(x: Tensor, c: float) -> Tensor:
    """Multiply by a finite scalar."""
    c = float(c)
    if not np.isfinite(c):
        raise NumericError(f"scale factor must be finite, got {c!r}")
    return x * c


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0  # subgradient at exactly 0 is 0

    def backward(g):
        x._accum(g * mask)

    return Tensor._from_op(np.where(mask, x.data, 0.0), (x,), backward)


def sigmoid(x: Tensor) -> Tensor:
    d = x.data
    out = np.empty_like(d)
    pos = d >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    ex = np.exp(d[~pos])
    out[~pos] = ex / (1.0 + ex)

    def backward(g):
        x._accum(g * out * (1.0 - out))

    return Tensor._from_op(out, (x,), backward)


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def backward(g):
        x._accum(g * (1.0 - out * out))

    return Tensor._from_op(out, (x,), backward)


def exp(x: Tensor) -> Tensor:
    out = np.exp(np.minimum(x.data, _EXP_MAX))

    def backward(g):
        x._accum(g * out)

    return Tensor._from_op(out, (x,), backward)


def log(x: Tensor) -> Tensor:
    if np.any(x.data <= 0):
        raise NumericError("log requires strictly positive inputs")
    out = np.log(x.data)

    def backward(g):
        x._accum(g / x.data)

    return Tensor._from_op(out, (x,), backward)


def softmax_axis(x: Tensor, axis: int) -> Tensor:
    """Softmax along ``axis``, stabilized by max subtraction.

    Outputs are positive and sum to 1 along the axis; invariant under adding
    a constant along the axis.
    """
    nd = x.data.ndim
    if not isinstance(axis, int) or not (-nd <= axis < nd):
        raise IndexError(f"softmax axis {axis} invalid for shape {x.data.shape}")
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        x._accum(out * (g - inner))

    return Tensor._from_op(out, (x,), backward)


def conv1d_valid(seq: Tensor, kernels: Tensor, bias: Tensor) -> Tensor:
    """Valid (no padding) cross-correlation over the time axis.

    ``seq`` is (L, d_in), ``kernels`` is (w, d_in, d_out), ``bias`` is
    (d_out,); the result is (L - w + 1, d_out).
    """
    sd, kd, bd = seq.data, kernels.data, bias.data
    if sd.ndim != 2 or kd.ndim != 3 or bd.ndim != 1:
        raise DimensionError(
            f"conv1d_valid expects (L,d_in), (w,d_in,d_out), (d_out,);"
            f" got {sd.shape}, {kd.shape}, {bd.shape}"
        )
    w, d_in, d_out = kd.shape
    if w < 1:
        raise DataError(f"kernel width must be >= 1, got {w}")
    if sd.shape[1] != d_in or bd.shape[0] != d_out:
        raise DimensionError(
            f"conv1d_valid channel mismatch: seq {sd.shape}, kernels {kd.shape}, bias {bd.shape}"
        )
    L = sd.shape[0]
    if L < w:
        raise DataError(f"sequence too short for convolution: length {L} < width {w}")
    # windows[t, j, i] = seq[t + j, i]
    windows = np.lib.stride_tricks.sliding_window_view(sd, w, axis=0).transpose(0, 2, 1)
    out = np.einsum("tji,jio->to", windows, kd) + bd

    def backward(g):
        bias._accum(g.sum(axis=0))
        kernels._accum(np.einsum("tji,to->jio", windows, g))
        d_windows = np.einsum("to,jio->tji", g, kd)
        d_seq = np.zeros_like(sd)
        T = L - w + 1
        for j in range(w):
            d_seq[j : j + T] += d_windows[:, j, :]
        seq._accum(d_seq)

    return Tensor._from_op(np.ascontiguousarray(out), (seq, kernels, bias), backward)


@dataclass
class LSTMWeights:
    """Gated-recurrence weights; gate order along the last axis is i, f, g, o."""

    w_x: Tensor  # (d_in, 4*d_h)
    w_h: Tensor  # (d_h, 4*d_h)
    bias: Tensor  # (4*d_h,)

    @property
    def hidden_size(self) -> int:
        return self.w_h.data.shape[0]

    def validate(self, d_in: int) -> None:
        d_h = self.hidden_size
        if self.w_x.data.shape != (d_in, 4 * d_h):
            raise DimensionError(
                f"lstm w_x shape {self.w_x.data.shape} inconsistent with d_in={d_in}, d_h={d_h}"
            )
        if self.w_h.data.shape != (d_h, 4 * d_h):
            raise DimensionError(f"lstm w_h shape {self.w_h.data.shape} inconsistent with d_h={d_h}")
        if self.bias.data.shape != (4 * d_h,):
            raise DimensionError(f"lstm bias shape {self.bias.data.shape} inconsistent with d_h={d_h}")


def lstm_step(x: Tensor, state: tuple[Tensor, Tensor], weights: LSTMWeights) -> tuple[Tensor, Tensor]:
    """One step of the standard gated recurrence.

    Input/forget/output gates are sigmoid, the candidate is tanh:
    ``c' = f*c + i*g`` and ``h' = o*tanh(c')``.
    """
    h, c = state
    if x.data.ndim != 1:
        raise DimensionError(f"lstm_step input must be 1-D, got shape {x.data.shape}")
    weights.validate(x.data.shape[0])
    d_h = weights.hidden_size
    if h.data.shape != (d_h,) or c.data.shape != (d_h,):
        raise DimensionError(
            f"lstm_step state shapes {h.data.shape}/{c.data.shape} inconsistent with d_h={d_h}"
        )
    z = matmul(x, weights.w_x) + matmul(h, weights.w_h) + weights.bias
    i = sigmoid(z[0:d_h])
    f = sigmoid(z[d_h : 2 * d_h])
    g = tanh(z[2 * d_h : 3 * d_h])
    o = sigmoid(z[3 * d_h : 4 * d_h])
    c_new = f * c + i * g
    h_new = o * tanh(c_new)
    return h_new, c_new


def cross_entropy(logits: Tensor, labels: Sequence[int]) -> Tensor:
    """Mean negative log softmax probability of the gold class.

    ``logits`` is (n, C); ``labels`` is an int sequence in [0, C).
    """
    ld = logits.data
    if ld.ndim != 2:
        raise DimensionError(f"cross_entropy expects (n, C) logits, got shape {ld.shape}")
    n, C = ld.shape
    idx = np.asarray(labels, dtype=np.int64)
    if idx.shape != (n,):
        raise DimensionError(f"cross_entropy got {idx.shape[0] if idx.ndim else '?'} labels for {n} rows")
    if idx.size and (idx.min() < 0 or idx.max() >= C):
        raise DataError(f"label out of range [0, {C}): {int(idx[(idx < 0) | (idx >= C)][0])}")
    shifted = ld - ld.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - lse
    loss = -float(logp[np.arange(n), idx].mean())

    def backward(g):
        soft = np.exp(logp)
        soft[np.arange(n), idx] -= 1.0
        logits._accum(soft * (float(g) / n))

    return Tensor._from_op(np.asarray(loss, dtype=np.float64), (logits,), backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    """Concatenate along ``axis``; gradient splits back to the parts."""
    ts = list(tensors)
    if not ts:
        raise DimensionError("concat needs at least one tensor")
    data = np.concatenate([t.data for t in ts], axis=axis)
    sizes = [t.data.shape[axis] for t in ts]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            t._accum(g[tuple(sl)])

    return Tensor._from_op(data, tuple(ts), backward)


def stack_rows(tensors: Sequence[Tensor]) -> Tensor:
    """Stack equally sized 1-D tensors into a matrix, one per row."""
    ts = list(tensors)
    if not ts:
        raise DimensionError("stack_rows needs at least one tensor")
    for t in ts:
        if t.data.ndim != 1:
            raise DimensionError(f"stack_rows expects 1-D tensors, got shape {t.data.shape}")
        if t.data.shape != ts[0].data.shape:
            raise DimensionError(
                f"stack_rows needs equal shapes, got {ts[0].data.shape} vs {t.data.shape}"
            )
    data = np.stack([t.data for t in ts], axis=0)

    def backward(g):
        for r, t in enumerate(ts):
            t._accum(g[r])

    return Tensor._from_op(data, tuple(ts), backward)


def gather_rows(table: Tensor, ids: Sequence[int]) -> Tensor:
    """Select rows of a matrix by index; gradients scatter-add back."""
    td = table.data
    if td.ndim != 2:
        raise DimensionError(f"gather_rows expects a matrix table, got shape {td.shape}")
    idx = np.asarray(ids, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= td.shape[0]):
        bad = int(idx[(idx < 0) | (idx >= td.shape[0])][0])
        raise DataError(f"row id {bad} out of range [0, {td.shape[0]})")

    def backward(g):
        full = np.zeros_like(td)
        np.add.at(full, idx, g)
        table._accum(full)

    return Tensor._from_op(td[idx].copy(), (table,), backward)


def zeros(*shape: int) -> Tensor:
    return Tensor(np.zeros(shape, dtype=np.float64))
