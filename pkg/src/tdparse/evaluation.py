"""Span and attachment scoring, confusion matrices and reports.

All numbers are micro-averaged over the document set. Edges are identified
by the spans of their endpoints (meta parents by name), so parses over
automatically extracted spans can be scored against gold annotation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import EVENT, META_NAMES, RELATIONS, CorpusError, Document


@dataclass
class PRF:
    correct: int = 0
    predicted: int = 0
    gold: int = 0

    @property
    def precision(self) -> float:
        return self.correct / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.correct / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: "PRF") -> "PRF":
        return PRF(self.correct + other.correct, self.predicted + other.predicted, self.gold + other.gold)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "correct": self.correct, "predicted": self.predicted, "gold": self.gold}


def _as_list(docs) -> list[Document]:
    return [docs] if isinstance(docs, Document) else list(docs)


def pair_documents(gold, pred) -> list[tuple[Document, Document]]:
    """Pair documents by id; any id present on one side only is an error."""
    gold, pred = _as_list(gold), _as_list(pred)
    gold_ids = {d.id: d for d in gold}
    pred_ids = {d.id: d for d in pred}
    if len(gold_ids) != len(gold) or len(pred_ids) != len(pred):
        raise CorpusError("duplicate document ids")
    if gold_ids.keys() != pred_ids.keys():
        only_gold = sorted(gold_ids.keys() - pred_ids.keys())
        only_pred = sorted(pred_ids.keys() - gold_ids.keys())
        raise CorpusError(f"document id mismatch: gold only {only_gold}, predicted only {only_pred}")
    return [(gold_ids[i], pred_ids[i]) for i in gold_ids]


# --- spans ----------------------------------------------------------------

def _span_label(node, mode: str) -> str:
    if mode == "label":
        return node.subtype
    if mode == "binary":
        return node.kind
    if mode == "span":
        return "span"
    raise ValueError(f"unknown span mode {mode!r}")


def span_prf(gold, pred, mode: str = "label") -> dict[str, PRF]:
    """Exact-match span scoring per label plus ``"overall"``.

    ``mode`` is ``"label"`` (full subtypes), ``"binary"`` (time vs event) or
    ``"span"`` (labels ignored).
    """
    scores: dict[str, PRF] = {}
    for g, p in pair_documents(gold, pred):
        gset = {(n.span, _span_label(n, mode)) for n in g.nodes}
        pset = {(n.span, _span_label(n, mode)) for n in p.nodes}
        for item in gset | pset:
            label = item[1]
            s = scores.setdefault(label, PRF())
            s.gold += item in gset
            s.predicted += item in pset
            s.correct += item in gset and item in pset
    overall = PRF()
    for s in scores.values():
        overall = overall + s
    result = dict(sorted(scores.items()))
    result["overall"] = overall
    return result


# --- attachment -----------------------------------------------------------

def _node_key(doc_nodes: dict, node_id: int):
    if node_id in META_NAMES:
        return ("meta", META_NAMES[node_id])
    return ("span",) + tuple(doc_nodes[node_id].span)


def edge_keys(doc: Document, labeled: bool) -> set[tuple]:
    by_id = doc.node_by_id()
    keys = set()
    for e in doc.edges:
        key = (_node_key(by_id, e.child), _node_key(by_id, e.parent))
        keys.add(key + (e.relation,) if labeled else key)
    return keys


def attachment_prf(gold, pred, labeled: bool = False) -> PRF:
    """Precision/recall/f over <child, parent> (or <child, relation, parent>) tuples."""
    total = PRF()
    for g, p in pair_documents(gold, pred):
        gk, pk = edge_keys(g, labeled), edge_keys(p, labeled)
        total = total + PRF(len(gk & pk), len(pk), len(gk))
    return total


# --- confusion matrices ---------------------------------------------------

@dataclass
class ConfusionMatrix:
    labels: tuple[str, ...]
    counts: np.ndarray
    coverage: float = 1.0
    excluded: int = 0

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "counts": self.counts.tolist(),
                "row_totals": self.row_totals.tolist(), "col_totals": self.col_totals.tolist(),
                "total": self.total, "coverage": self.coverage, "excluded": self.excluded}

    def format(self, title: str = "") -> str:
        width = max(8, *(len(l) + 2 for l in self.labels))
        head = "gold/pred".ljust(width)
        lines = [title] if title else []
        lines.append(head + "".join(l.rjust(width) for l in self.labels) + "total".rjust(width))
        for label, row in zip(self.labels, self.counts):
            lines.append(label.ljust(width) + "".join(str(v).rjust(width) for v in row)
                         + str(row.sum()).rjust(width))
        lines.append("total".ljust(width) + "".join(str(v).rjust(width) for v in self.col_totals)
                     + str(self.total).rjust(width))
        return "\n".join(lines)


def _locality(doc: Document, child_pos: dict[int, int], child: int, parent: int) -> str | None:
    if parent not in child_pos:
        return None
    diff = child_pos[child] - child_pos[parent]
    if diff == 1:
        return "pre"
    return "far" if diff > 1 else None


def parent_locality_confusion(gold, pred, child_kinds=(EVENT,)) -> ConfusionMatrix:
    """Gold vs predicted parent position: immediately previous node ("pre") or further back ("far").

    Children are matched by span. Children whose gold or predicted parent is
    a meta node or follows them are left out; ``coverage`` is the fraction of
    span-matched children of ``child_kinds`` that were counted.
    """
    labels = ("pre", "far")
    counts = np.zeros((2, 2), dtype=np.int64)
    considered = evaluated = 0
    for g, p in pair_documents(gold, pred):
        g_pos = {n.node_id: k for k, n in enumerate(g.nodes)}
        p_pos = {n.node_id: k for k, n in enumerate(p.nodes)}
        g_parent = {e.child: e.parent for e in g.edges}
        p_parent = {e.child: e.parent for e in p.edges}
        p_by_span = {n.span: n for n in p.nodes}
        for n in g.nodes:
            if n.kind not in child_kinds or n.span not in p_by_span or n.node_id not in g_parent:
                continue
            pn = p_by_span[n.span]
            if pn.node_id not in p_parent:
                continue
            considered += 1
            row = _locality(g, g_pos, n.node_id, g_parent[n.node_id])
            col = _locality(p, p_pos, pn.node_id, p_parent[pn.node_id])
            if row is None or col is None:
                continue
            counts[labels.index(row), labels.index(col)] += 1
            evaluated += 1
    coverage = evaluated / considered if considered else 1.0
    return ConfusionMatrix(labels, counts, coverage, considered - evaluated)


def relation_confusion(gold, pred) -> ConfusionMatrix:
    """Gold (rows) vs predicted (columns) relations over correctly attached children only."""
    counts = np.zeros((len(RELATIONS), len(RELATIONS)), dtype=np.int64)
    considered = evaluated = 0
    for g, p in pair_documents(gold, pred):
        gk, pk = g.node_by_id(), p.node_by_id()
        pred_edges = {_node_key(pk, e.child): (_node_key(pk, e.parent), e.relation) for e in p.edges}
        for e in g.edges:
            child = _node_key(gk, e.child)
            if child not in pred_edges:
                continue
            considered += 1
            parent, relation = pred_edges[child]
            if parent != _node_key(gk, e.parent):
                continue
            counts[RELATIONS.index(e.relation), RELATIONS.index(relation)] += 1
            evaluated += 1
    coverage = evaluated / considered if considered else 1.0
    return ConfusionMatrix(RELATIONS, counts, coverage, considered - evaluated)


# --- reports ----------------------------------------------------------------

def evaluation_report(gold, pred) -> dict:
    pairs = pair_documents(gold, pred)
    gold, pred = [g for g, _ in pairs], [p for _, p in pairs]
    return {
        "averaging": "micro over documents",
        "documents": len(pairs),
        "spans": {mode: {k: v.to_dict() for k, v in span_prf(gold, pred, mode).items()}
                  for mode in ("span", "binary", "label")},
        "attachment": {"unlabeled": attachment_prf(gold, pred, False).to_dict(),
                       "labeled": attachment_prf(gold, pred, True).to_dict()},
        "parent_locality_confusion": parent_locality_confusion(gold, pred).to_dict(),
        "relation_confusion": relation_confusion(gold, pred).to_dict(),
    }


def format_report(report: dict) -> str:
    def row(name, d):
        return (f"  {name:<20}{d['precision']:>8.3f}{d['recall']:>8.3f}{d['f1']:>8.3f}"
                f"{d['correct']:>8}{d['predicted']:>8}{d['gold']:>8}")

    header = f"  {'':<20}{'p':>8}{'r':>8}{'f':>8}{'corr':>8}{'pred':>8}{'gold':>8}"
    out = [f"Evaluation over {report['documents']} documents ({report['averaging']})", ""]
    for mode, title in (("span", "Spans (exact match, labels ignored)"),
                        ("binary", "Spans (time vs event)"), ("label", "Spans (full type set)")):
        out += [title, header] + [row(k, v) for k, v in report["spans"][mode].items()] + [""]
    out += ["Attachment", header]
    out += [row(k, v) for k, v in report["attachment"].items()] + [""]
    for key, title in (("parent_locality_confusion", "Parent node confusion (rows gold, columns predicted)"),
                       ("relation_confusion", "Relation confusion over correctly attached pairs")):
        cm = report[key]
        matrix = ConfusionMatrix(tuple(cm["labels"]), np.array(cm["counts"]), cm["coverage"], cm["excluded"])
        out += [matrix.format(title), f"  coverage {cm['coverage']:.3f} ({cm['excluded']} excluded)", ""]
    return "\n".join(out)


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True)
