"""Tensors and the reverse-mode gradient tape.

A :class:`Tensor` wraps a float64 numpy array. Operations in
:mod:`tdparse.autodiff.ops` record themselves on the active :class:`Tape`
when any input requires a gradient; ``Tape.backward`` then walks the
recorded nodes in exact reverse order.

    >>> from tdparse.autodiff import Tape, Tensor, ops
    >>> w = Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
    >>> with Tape() as tape:
    ...     loss = ops.cross_entropy(ops.matvec(w, Tensor([1.0, 1.0])), 0)
    ...     tape.backward(loss)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class AutodiffError(RuntimeError):
    """Raised for misuse of the tape (e.g. backward without a forward pass)."""


class ShapeError(ValueError):
    """Incompatible operand shapes for a primitive."""


class Tensor:
    """Dense float64 array with an optional gradient accumulator.

    Leaf tensors created with ``requires_grad=True`` are parameters: their
    ``grad`` is a persistent accumulator that ``Tape.backward`` adds into.
    """

    __slots__ = ("data", "grad", "requires_grad", "name", "_recorded")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.name = name
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self._recorded = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def is_leaf(self) -> bool:
        return not self._recorded

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label})"

    # Operator sugar; the implementations live in ops.
    def __add__(self, other):
        from . import ops
        return ops.add(self, as_tensor(other))

    __radd__ = __add__

    def __mul__(self, other):
        from . import ops
        return ops.mul(self, as_tensor(other))

    __rmul__ = __mul__

    def __matmul__(self, other):
        from . import ops
        if other.data.ndim == 1:
            return ops.matvec(self, other)
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from . import ops
        return ops.take(self, index)


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


BackwardFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]


@dataclass
class TapeNode:
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: BackwardFn
    op: str


_ACTIVE: list["Tape"] = []


def active_tape() -> "Tape | None":
    return _ACTIVE[-1] if _ACTIVE else None


class Tape:
    """Ordered record of primitive operations.

    Use as a context manager; operations executed inside the block are
    recorded. Outside any tape, operations compute values only.
    """

    def __init__(self):
        self.nodes: list[TapeNode] = []
        self._outputs: set[int] = set()

    def __enter__(self) -> "Tape":
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _ACTIVE.remove(self)

    def record(self, output: Tensor, inputs: Sequence[Tensor], backward: BackwardFn, op: str) -> None:
        output._recorded = True
        self.nodes.append(TapeNode(output, tuple(inputs), backward, op))
        self._outputs.add(id(output))

    def clear(self) -> None:
        self.nodes.clear()
        self._outputs.clear()

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(param) into every leaf parameter's ``grad``.

        The tape is cleared afterwards, ready for the next example.
        """
        if id(loss) not in self._outputs:
            raise AutodiffError("backward() called on a tensor with no recorded forward pass")
        if loss.data.size != 1:
            raise AutodiffError(f"backward() needs a scalar loss, got shape {loss.shape}")
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for node in reversed(self.nodes):
            g = grads.pop(id(node.output), None)
            if g is None:
                continue
            for inp, ig in zip(node.inputs, node.backward(g)):
                if ig is None or not inp.requires_grad:
                    continue
                if inp.is_leaf:
                    inp.grad += ig
                elif id(inp) in grads:
                    grads[id(inp)] = grads[id(inp)] + ig
                else:
                    grads[id(inp)] = ig
        self.clear()
