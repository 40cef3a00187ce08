"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tape, Tensor


def relative_error(analytic: np.ndarray, numeric: np.ndarray, atol: float = 1e-9) -> float:
    """Norm-wise relative error ``|a - n| / max(|a|, |n|)``.

    Returns 0 when both gradients are below ``atol`` in norm, so parameters
    the loss is invariant to do not report finite-difference noise as error.
    """
    denom = max(np.linalg.norm(analytic), np.linalg.norm(numeric))
    if denom <= atol:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


def numeric_gradient(loss_fn: Callable[[], Tensor], param: Tensor, eps: float = 1e-3) -> np.ndarray:
    grad = np.zeros_like(param.data)
    flat = param.data.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + eps
        plus = float(loss_fn().data)
        flat[k] = orig - eps
        minus = float(loss_fn().data)
        flat[k] = orig
        gflat[k] = (plus - minus) / (2.0 * eps)
    return grad


def check_gradients(loss_fn: Callable[[], Tensor], params: dict[str, Tensor],
                    eps: float = 1e-3) -> dict[str, float]:
    """Relative error between taped and finite-difference gradients per parameter.

    ``loss_fn`` must rebuild the forward pass from the current parameter values.
    """
    for p in params.values():
        p.zero_grad()
    with Tape() as tape:
        tape.backward(loss_fn())
    analytic = {name: p.grad.copy() for name, p in params.items()}
    return {name: relative_error(analytic[name], numeric_gradient(loss_fn, p, eps))
            for name, p in params.items()}
