"""Differentiable primitives.

Every function takes and returns :class:`Tensor` objects and, when a tape is
active and an input requires a gradient, records a backward rule.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .tensor import Tensor, ShapeError, active_tape


def _make(value: np.ndarray, inputs: Sequence[Tensor], backward, op: str) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = value
    out.name = None
    out.grad = None
    out._recorded = False
    out.requires_grad = False
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(out, inputs, backward, op)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: incompatible shapes {a.shape} and {b.shape}") from None


# --- linear algebra -------------------------------------------------------

def matvec(m: Tensor, v: Tensor) -> Tensor:
    if m.data.ndim != 2 or v.data.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ShapeError(f"matvec: incompatible shapes {m.shape} and {v.shape}")
    md, vd = m.data, v.data

    def backward(g):
        return np.outer(g, vd), md.T @ g

    return _make(md @ vd, (m, v), backward, "matvec")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")
    ad, bd = a.data, b.data

    def backward(g):
        return g @ bd.T, ad.T @ g

    return _make(ad @ bd, (a, b), backward, "matmul")


# --- elementwise ----------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape

    def backward(g):
        return _unbroadcast(g, sa), _unbroadcast(g, sb)

    return _make(a.data + b.data, (a, b), backward, "add")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("mul", a, b)
    ad, bd = a.data, b.data

    def backward(g):
        return _unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)

    return _make(ad * bd, (a, b), backward, "mul")


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def backward(g):
        return (g * (1.0 - y * y),)

    return _make(y, (x,), backward, "tanh")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def sigmoid(x: Tensor) -> Tensor:
    y = _sigmoid(x.data)

    def backward(g):
        return (g * y * (1.0 - y),)

    return _make(y, (x,), backward, "sigmoid")


def add_n(tensors: Sequence[Tensor]) -> Tensor:
    """Sum a non-empty set of same-shaped tensors."""
    if not tensors:
        raise ShapeError("add_n: empty input set")
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise ShapeError(f"add_n: incompatible shapes {shape} and {t.shape}")
    value = np.sum([t.data for t in tensors], axis=0)

    def backward(g):
        return [g] * len(tensors)

    return _make(value, tuple(tensors), backward, "add_n")


def reduce_sum(x: Tensor, axis: int | None = None) -> Tensor:
    shape = x.shape

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, shape).copy(),)
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return _make(np.asarray(x.data.sum(axis=axis)), (x,), backward, "reduce_sum")


# --- structural -----------------------------------------------------------

def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    try:
        value = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError:
        shapes = " and ".join(str(t.shape) for t in tensors)
        raise ShapeError(f"concat: incompatible shapes {shapes}") from None
    sizes = [t.shape[axis] for t in tensors]
    cuts = np.cumsum(sizes)[:-1]

    def backward(g):
        return np.split(g, cuts, axis=axis)

    return _make(value, tuple(tensors), backward, "concat")


def take(x: Tensor, index) -> Tensor:
    """Basic indexing/slicing (``x[index]``)."""
    shape = x.shape

    def backward(g):
        out = np.zeros(shape)
        np.add.at(out, index, g)
        return (out,)

    return _make(np.array(x.data[index]), (x,), backward, "take")


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = x.shape
    try:
        value = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"reshape: incompatible shapes {old} and {shape}") from None

    def backward(g):
        return (g.reshape(old),)

    return _make(value, (x,), backward, "reshape")


def lookup(table: Tensor, indices) -> Tensor:
    """Embedding lookup: rows of ``table`` selected by integer ``indices``."""
    idx = np.asarray(indices, dtype=np.int64)
    if table.data.ndim != 2:
        raise ShapeError(f"lookup: table must be 2-D, got shape {table.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise ShapeError(f"lookup: index out of range for table of shape {table.shape}")
    shape = table.shape

    def backward(g):
        out = np.zeros(shape)
        np.add.at(out, idx, g)
        return (out,)

    return _make(table.data[idx], (table,), backward, "lookup")


# --- normalisation and loss -----------------------------------------------

def _softmax_np(z: np.ndarray, axis: int, mask: np.ndarray | None) -> np.ndarray:
    if mask is not None:
        z = np.where(mask, z, -np.inf)
    z = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def softmax(x: Tensor, axis: int = -1, mask=None) -> Tensor:
    """Softmax along ``axis``; entries where ``mask`` is False get probability 0.

    Every slice along ``axis`` must keep at least one unmasked entry.
    """
    m = None if mask is None else np.asarray(mask, dtype=bool)
    if m is not None and m.shape != x.shape:
        raise ShapeError(f"softmax: incompatible shapes {x.shape} and {m.shape}")
    y = _softmax_np(x.data, axis, m)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _make(y, (x,), backward, "softmax")


def cross_entropy(scores: Tensor, gold_index: int) -> Tensor:
    """``-log softmax(scores)[gold_index]`` for a 1-D score vector."""
    if scores.data.ndim != 1:
        raise ShapeError(f"cross_entropy: scores must be 1-D, got shape {scores.shape}")
    n = scores.shape[0]
    if not 0 <= gold_index < n:
        raise IndexError(f"cross_entropy: gold index {gold_index} out of range for {n} scores")
    z = scores.data - scores.data.max()
    logz = np.log(np.exp(z).sum())
    p = np.exp(z - logz)

    def backward(g):
        d = p.copy()
        d[gold_index] -= 1.0
        return (g * d,)

    return _make(np.asarray(logz - z[gold_index]), (scores,), backward, "cross_entropy")


def cross_entropy_rows(scores: Tensor, gold: Sequence[int]) -> Tensor:
    """Summed per-row cross-entropy of a (n, k) score matrix."""
    if scores.data.ndim != 2 or scores.shape[0] != len(gold):
        raise ShapeError(f"cross_entropy_rows: incompatible shapes {scores.shape} and ({len(gold)},)")
    gold = np.asarray(gold, dtype=np.int64)
    if gold.size and (gold.min() < 0 or gold.max() >= scores.shape[1]):
        raise IndexError("cross_entropy_rows: gold index out of range")
    rows = np.arange(len(gold))
    p = _softmax_np(scores.data, 1, None)
    loss = -np.log(p[rows, gold]).sum()

    def backward(g):
        d = p.copy()
        d[rows, gold] -= 1.0
        return (g * d,)

    return _make(np.asarray(loss), (scores,), backward, "cross_entropy_rows")


# --- recurrent ------------------------------------------------------------

def lstm_sequence(x: Tensor, w: Tensor, b: Tensor, reverse: bool = False) -> Tensor:
    """Run an LSTM over the rows of ``x`` (shape (T, n_in)) from zero state.

    ``w`` has shape (4h, n_in + h) with gate blocks ordered input, forget,
    candidate, output; ``b`` has shape (4h,). Returns hidden states (T, h),
    row t aligned with input row t in both directions. Fused into a single
    primitive with a hand-written BPTT backward rule.
    """
    if x.data.ndim != 2 or w.data.ndim != 2 or b.data.ndim != 1:
        raise ShapeError(f"lstm_sequence: incompatible shapes {x.shape} and {w.shape}")
    T, n_in = x.shape
    four_h = w.shape[0]
    h = four_h // 4
    if four_h % 4 or w.shape[1] != n_in + h or b.shape[0] != four_h:
        raise ShapeError(f"lstm_sequence: incompatible shapes {x.shape} and {w.shape}")
    if T == 0:
        raise ShapeError("lstm_sequence: empty input sequence")

    X = x.data[::-1] if reverse else x.data
    W, bias = w.data, b.data
    Wx, Wh = W[:, :n_in], W[:, n_in:]
    XW = X @ Wx.T + bias
    H = np.zeros((T, h))
    C = np.zeros((T, h))
    gates = np.zeros((T, four_h))
    h_prev = np.zeros(h)
    c_prev = np.zeros(h)
    for t in range(T):
        z = XW[t] + Wh @ h_prev
        i = _sigmoid(z[:h])
        f = _sigmoid(z[h:2 * h])
        g = np.tanh(z[2 * h:3 * h])
        o = _sigmoid(z[3 * h:])
        c_prev = f * c_prev + i * g
        h_prev = o * np.tanh(c_prev)
        gates[t, :h], gates[t, h:2 * h], gates[t, 2 * h:3 * h], gates[t, 3 * h:] = i, f, g, o
        C[t] = c_prev
        H[t] = h_prev
    tanh_c = np.tanh(C)

    def backward(dH):
        dH = dH[::-1] if reverse else dH
        dZ = np.zeros((T, four_h))
        dh_next = np.zeros(h)
        dc_next = np.zeros(h)
        for t in range(T - 1, -1, -1):
            i, f, g, o = gates[t, :h], gates[t, h:2 * h], gates[t, 2 * h:3 * h], gates[t, 3 * h:]
            dh = dH[t] + dh_next
            dc = dh * o * (1.0 - tanh_c[t] ** 2) + dc_next
            c_before = C[t - 1] if t > 0 else 0.0
            dz = dZ[t]
            dz[:h] = dc * g * i * (1.0 - i)
            dz[h:2 * h] = dc * c_before * f * (1.0 - f)
            dz[2 * h:3 * h] = dc * i * (1.0 - g * g)
            dz[3 * h:] = dh * tanh_c[t] * o * (1.0 - o)
            dc_next = dc * f
            dh_next = Wh.T @ dz
        H_prev = np.vstack([np.zeros((1, h)), H[:-1]])
        dW = np.hstack([dZ.T @ X, dZ.T @ H_prev])
        dX = dZ @ Wx
        if reverse:
            dX = dX[::-1]
        return np.ascontiguousarray(dX), dW, dZ.sum(axis=0)

    out = H[::-1].copy() if reverse else H
    return _make(out, (x, w, b), backward, "lstm_sequence")
