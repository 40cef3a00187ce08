"""Greedy constrained decoding shared by every ranking scorer."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..corpus import DEPEND_ON, TIME, Document, Edge, TemporalTree
from .candidates import CandidateSet, NodeIndex, extract_candidates

# (child id, candidate set, node index) -> scores of shape (n_candidates, n_labels)
Scorer = Callable[[int, CandidateSet, NodeIndex], np.ndarray]


@dataclass
class Decision:
    child: int
    candidates: tuple[int, ...]
    labels: tuple[str, ...]
    scores: np.ndarray          # flattened candidate-major, label-minor
    allowed: np.ndarray         # same layout; False for masked entries
    probabilities: np.ndarray   # softmax over allowed entries
    parent: int
    relation: str


@dataclass
class ParseResult:
    document: Document
    tree: TemporalTree
    decisions: list[Decision] = field(default_factory=list)

    def diagnostics(self) -> list[dict]:
        return [{"doc": self.document.id, "child": d.child, "candidates": list(d.candidates),
                 "labels": list(d.labels), "probabilities": d.probabilities.tolist(),
                 "parent": d.parent, "relation": d.relation} for d in self.decisions]


def write_diagnostics(path, results: list[ParseResult]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            for rec in r.diagnostics():
                fh.write(json.dumps(rec) + "\n")


def masked_softmax(scores: np.ndarray, allowed: np.ndarray) -> np.ndarray:
    z = np.where(allowed, scores, -np.inf)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def relation_allowed(labels: tuple[str, ...], child_kind: str, mask_relations: bool) -> np.ndarray:
    allowed = np.ones(len(labels), dtype=bool)
    if mask_relations and child_kind != TIME:
        allowed &= np.array([lab != DEPEND_ON for lab in labels])
        if not allowed.any():
            raise ValueError("relation mask leaves no label for event children; add a non depend-on relation")
    return allowed


def greedy_decode(doc: Document, scorer: Scorer, labels: tuple[str, ...],
                  mask_relations: bool = True) -> ParseResult:
    """Attach every node in textual order to its best-scoring legal candidate.

    Candidates that are current descendants of the child are dropped, so the
    output is always a tree; ties go to the earliest candidate, then the
    lowest label index.
    """
    index = NodeIndex(doc)
    tree = TemporalTree()
    decisions = []
    for node in doc.nodes:
        cands = extract_candidates(doc, node.node_id, index)
        raw = np.asarray(scorer(node.node_id, cands, index), dtype=np.float64)
        if raw.shape != (len(cands.candidates), len(labels)):
            raise ValueError(f"scorer returned shape {raw.shape}, expected {(len(cands.candidates), len(labels))}")
        legal = np.array([not tree.is_ancestor(node.node_id, c) for c in cands.candidates])
        allowed = legal[:, None] & relation_allowed(labels, node.kind, mask_relations)[None, :]
        flat, flat_allowed = raw.reshape(-1), allowed.reshape(-1)
        best = int(np.argmax(np.where(flat_allowed, flat, -np.inf)))
        parent = cands.candidates[best // len(labels)]
        relation = labels[best % len(labels)]
        tree.parents[node.node_id] = (parent, relation)
        decisions.append(Decision(node.node_id, cands.candidates, labels, flat, flat_allowed,
                                  masked_softmax(flat, flat_allowed), parent, relation))
    return ParseResult(doc.with_edges(tree.edges()), tree, decisions)


def unlabeled_edges(tree: TemporalTree, default_relation: str, kinds: dict[int, str]) -> list[Edge]:
    """Replace the placeholder relation of an unlabeled parse with ``default_relation``."""
    out = []
    for e in tree.edges():
        rel = default_relation
        if rel == DEPEND_ON and kinds[e.child] != TIME:
            rel = "overlap"
        out.append(Edge(e.child, e.parent, rel))
    return out
