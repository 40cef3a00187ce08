"""Candidate parents and the shared node-distance / same-sentence conditions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import META_NODES, TIME, Document, Node

WINDOW_AFTER = 2  # sentences following the child that stay in the window


@dataclass(frozen=True)
class CandidateSet:
    child: int
    candidates: tuple[int, ...]


class NodeIndex:
    """Textual positions and sentence ids for one document's nodes."""

    def __init__(self, doc: Document):
        self.doc = doc
        self.nodes = list(doc.nodes)
        self.by_id: dict[int, Node] = {n.node_id: n for n in META_NODES}
        self.position: dict[int, int] = {}
        self.sentence: dict[int, int] = {}
        for k, n in enumerate(self.nodes):
            self.by_id[n.node_id] = n
            self.position[n.node_id] = k
            self.sentence[n.node_id] = n.sent_id if n.sent_id is not None else doc.sentence_of(n.span[0])
        # row of every node in the "meta first, then textual order" layout
        self.row = {n.node_id: r for r, n in enumerate(list(META_NODES) + self.nodes)}

    def is_meta(self, node_id: int) -> bool:
        return node_id not in self.position

    def node_diff(self, child: int, cand: int) -> int | None:
        """``child - cand`` in textual order, or None for meta candidates."""
        if self.is_meta(cand):
            return None
        return self.position[child] - self.position[cand]

    def same_sentence(self, child: int, cand: int) -> bool:
        return not self.is_meta(cand) and self.sentence[child] == self.sentence[cand]


def extract_candidates(doc: Document, child: int | Node, index: NodeIndex | None = None) -> CandidateSet:
    """Meta nodes, then every node from the document start to two sentences after the child.

    Time-expression children only get time expressions (plus meta nodes).
    """
    index = index or NodeIndex(doc)
    child_id = child.node_id if isinstance(child, Node) else child
    node = index.by_id[child_id]
    limit = index.sentence[child_id] + WINDOW_AFTER
    text = [n.node_id for n in index.nodes
            if n.node_id != child_id and index.sentence[n.node_id] <= limit
            and (node.kind != TIME or n.kind == TIME)]
    return CandidateSet(child_id, tuple(m.node_id for m in META_NODES) + tuple(text))


ND_CONDITIONS = ("diff=1", "diff>1 same sentence", "diff>1 different sentence", "diff<1")
SS_CONDITIONS = ("same sentence", "different sentence")


def nd_onehot(index: NodeIndex, child: int, cand: int) -> np.ndarray:
    """Node-distance condition; meta candidates fall in the ``diff<1`` class."""
    out = np.zeros(4)
    diff = index.node_diff(child, cand)
    if diff is None or diff < 1:
        out[3] = 1.0
    elif diff == 1:
        out[0] = 1.0
    elif index.same_sentence(child, cand):
        out[1] = 1.0
    else:
        out[2] = 1.0
    return out


def ss_onehot(index: NodeIndex, child: int, cand: int) -> np.ndarray:
    """Same-sentence condition; meta candidates count as a different sentence."""
    return np.array([1.0, 0.0]) if index.same_sentence(child, cand) else np.array([0.0, 1.0])
