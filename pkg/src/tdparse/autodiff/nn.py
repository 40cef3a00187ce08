"""Neural building blocks on top of the autodiff primitives."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from . import ops
from .tensor import ShapeError, Tensor

INIT_SCALE = 0.1


def uniform_param(rng: np.random.Generator, shape, name: str, scale: float = INIT_SCALE) -> Tensor:
    return Tensor(rng.uniform(-scale, scale, size=shape), requires_grad=True, name=name)


class Module:
    """Owns named parameters and sub-modules, in registration order."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._children: dict[str, Module] = {}

    def add_param(self, name: str, tensor: Tensor) -> Tensor:
        tensor.name = name
        self._params[name] = tensor
        return tensor

    def add_module(self, name: str, module: "Module") -> "Module":
        self._children[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for name, p in self._params.items():
            yield prefix + name, p
        for name, child in self._children.items():
            yield from child.named_parameters(prefix + name + ".")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = set(own) - set(state)
        if missing:
            raise KeyError(f"missing tensors in state: {sorted(missing)}")
        for name, p in own.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != p.shape:
                raise ShapeError(f"{name}: incompatible shapes {p.shape} and {value.shape}")
            p.data[...] = value


class Embedding(Module):
    def __init__(self, rng: np.random.Generator, size: int, dim: int):
        super().__init__()
        self.weight = self.add_param("weight", uniform_param(rng, (size, dim), "weight"))

    def __call__(self, indices) -> Tensor:
        return ops.lookup(self.weight, indices)


class LSTM(Module):
    """Single-direction LSTM with input/forget/candidate/output gate blocks.

    The forget-gate bias starts at 1.0.
    """

    def __init__(self, rng: np.random.Generator, input_dim: int, hidden_dim: int):
        super().__init__()
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.weight = self.add_param(
            "weight", uniform_param(rng, (4 * hidden_dim, input_dim + hidden_dim), "weight"))
        bias = np.zeros(4 * hidden_dim)
        bias[hidden_dim:2 * hidden_dim] = 1.0
        self.bias = self.add_param("bias", Tensor(bias, requires_grad=True))

    def __call__(self, x: Tensor, reverse: bool = False) -> Tensor:
        return ops.lstm_sequence(x, self.weight, self.bias, reverse=reverse)

    def step(self, x: Tensor, h_prev: Tensor, c_prev: Tensor) -> tuple[Tensor, Tensor]:
        return lstm_step(x, h_prev, c_prev, self.weight, self.bias)


def lstm_step(x: Tensor, h_prev: Tensor, c_prev: Tensor, w: Tensor, b: Tensor) -> tuple[Tensor, Tensor]:
    """One LSTM cell step composed from elementary primitives.

    Returns ``(h, c)`` with ``c = f*c_prev + i*g`` and ``h = o*tanh(c)``.
    """
    h = h_prev.shape[0]
    if w.shape != (4 * h, x.shape[0] + h) or c_prev.shape != (h,):
        raise ShapeError(f"lstm_step: incompatible shapes {w.shape} and {x.shape}")
    z = ops.add(ops.matvec(w, ops.concat([x, h_prev])), b)
    i = ops.sigmoid(z[:h])
    f = ops.sigmoid(z[h:2 * h])
    g = ops.tanh(z[2 * h:3 * h])
    o = ops.sigmoid(z[3 * h:])
    c = ops.add(ops.mul(f, c_prev), ops.mul(i, g))
    return ops.mul(o, ops.tanh(c)), c


class BiLSTM(Module):
    """Bidirectional LSTM; ``output_dim`` is split evenly across directions."""

    def __init__(self, rng: np.random.Generator, input_dim: int, output_dim: int):
        super().__init__()
        if output_dim <= 0 or output_dim % 2:
            raise ValueError(f"Bi-LSTM output size must be a positive even number, got {output_dim}")
        self.output_dim = output_dim
        self.forward = self.add_module("forward", LSTM(rng, input_dim, output_dim // 2))
        self.backward = self.add_module("backward", LSTM(rng, input_dim, output_dim // 2))

    def __call__(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.shape[0] == 0:
            raise ShapeError(f"bilstm: expected a non-empty (T, d) sequence, got shape {x.shape}")
        return ops.concat([self.forward(x), self.backward(x, reverse=True)], axis=1)


class MLP(Module):
    """``W2 . tanh(W1 . x + b1) + b2`` applied row-wise to a (n, d) input."""

    def __init__(self, rng: np.random.Generator, input_dim: int, hidden_dim: int, output_dim: int):
        super().__init__()
        self.w1 = self.add_param("w1", uniform_param(rng, (input_dim, hidden_dim), "w1"))
        self.b1 = self.add_param("b1", uniform_param(rng, (hidden_dim,), "b1"))
        self.w2 = self.add_param("w2", uniform_param(rng, (hidden_dim, output_dim), "w2"))
        self.b2 = self.add_param("b2", uniform_param(rng, (output_dim,), "b2"))

    def __call__(self, x: Tensor) -> Tensor:
        hidden = ops.tanh(ops.add(ops.matmul(x, self.w1), self.b1))
        return ops.add(ops.matmul(hidden, self.w2), self.b2)
