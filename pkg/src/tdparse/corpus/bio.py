"""BIO encoding of typed time/event spans."""

from __future__ import annotations

from .model import CorpusError, Document, TEXT_SUBTYPES

OUTSIDE = "O"
LABELS = (OUTSIDE,) + tuple(f"{p}-{s}" for s in TEXT_SUBTYPES for p in ("B", "I"))
LABEL_INDEX = {label: k for k, label in enumerate(LABELS)}


def bio_encode(doc: Document) -> list[str]:
    tags = [OUTSIDE] * len(doc.tokens)
    for node in doc.nodes:
        start, end = node.span
        if any(t != OUTSIDE for t in tags[start:end]):
            raise CorpusError(f"document {doc.id!r}: overlapping span at node {node.node_id}")
        tags[start] = f"B-{node.subtype}"
        for k in range(start + 1, end):
            tags[k] = f"I-{node.subtype}"
    return tags


def bio_decode(tags: list[str]) -> list[tuple[int, int, str]]:
    """Recover ``(start, end, subtype)`` spans.

    An ``I-X`` tag without a preceding ``B-X``/``I-X`` opens a new span, as
    if it were ``B-X``.
    """
    spans = []
    current = None
    for k, tag in enumerate(tags):
        if tag == OUTSIDE:
            if current:
                spans.append(tuple(current))
                current = None
            continue
        prefix, subtype = tag.split("-", 1)
        if prefix == "I" and current is not None and current[2] == subtype:
            current[1] = k + 1
            continue
        if current:
            spans.append(tuple(current))
        current = [k, k + 1, subtype]
    if current:
        spans.append(tuple(current))
    return spans
