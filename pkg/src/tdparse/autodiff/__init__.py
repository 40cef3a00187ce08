"""Minimal reverse-mode autodiff engine and neural layers."""

from . import ops
from .nn import BiLSTM, LSTM, MLP, Embedding, Module, lstm_step
from .optim import Adam, AdamState, adam_update
from .tensor import AutodiffError, ShapeError, Tape, Tensor

__all__ = [
    "Adam", "AdamState", "AutodiffError", "BiLSTM", "Embedding", "LSTM", "MLP",
    "Module", "ShapeError", "Tape", "Tensor", "adam_update", "lstm_step", "ops",
]
