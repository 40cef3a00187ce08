"""Seeded train/dev/test splitting and k-fold assignment."""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

from .model import CorpusError, Document


def _split_counts(n: int, ratios: tuple[float, float, float]) -> tuple[int, int, int]:
    # floor(train), floor(dev), remainder to test: 235 -> 188/23/24
    n_train = math.floor(n * ratios[0] + 1e-9)
    n_dev = math.floor(n * ratios[1] + 1e-9)
    return n_train, n_dev, n - n_train - n_dev


def split_corpus(docs: list[Document], ratios=(0.8, 0.1, 0.1), seed: int = 0):
    """Shuffle and split into ``(train, dev, test)``.

    Documents carrying a ``domain`` label are split per domain and the
    parts concatenated, so every split keeps the domain mix.
    """
    if len(ratios) != 3 or any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise CorpusError(f"split ratios must be three non-negative numbers summing to 1, got {ratios}")
    if len(docs) < 3:
        raise CorpusError(f"cannot split {len(docs)} documents into 3 parts")
    groups: dict[str, list[Document]] = defaultdict(list)
    for d in docs:
        groups[d.domain or ""].append(d)
    rng = np.random.default_rng(seed)
    train, dev, test = [], [], []
    for domain in sorted(groups):
        members = groups[domain]
        order = rng.permutation(len(members))
        n_train, n_dev, _ = _split_counts(len(members), tuple(ratios))
        shuffled = [members[k] for k in order]
        train += shuffled[:n_train]
        dev += shuffled[n_train:n_train + n_dev]
        test += shuffled[n_train + n_dev:]
    return train, dev, test


def k_folds(docs: list[Document], k: int = 10, seed: int = 0):
    """Yield ``(train, held_out)`` pairs for seeded k-fold cross-validation."""
    if k < 2 or len(docs) < k:
        raise CorpusError(f"cannot make {k} folds from {len(docs)} documents")
    order = np.random.default_rng(seed).permutation(len(docs))
    folds = np.array_split(order, k)
    for f in range(k):
        held = set(folds[f].tolist())
        yield ([docs[i] for i in order if i not in held], [docs[i] for i in folds[f]])
