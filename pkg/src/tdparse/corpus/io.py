"""JSON-lines document files: one document object per line.

Each line holds ``id``, ``tokens`` ([form, pos] pairs), ``sentences``
(half-open [start, end) token ranges), ``nodes`` ({id, span, kind, subtype})
and ``edges`` ({child, parent, relation}); ``dct`` and ``domain`` are
optional. Meta nodes are implicit and use the reserved negative ids.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .model import CorpusError, Document, Edge, Node, KIND_OF, assign_sentences, validate


def document_to_dict(doc: Document) -> dict:
    record = {
        "id": doc.id,
        "tokens": [[w, p] for w, p in doc.tokens],
        "sentences": [[s, e] for s, e in doc.sentences],
        "nodes": [{"id": n.node_id, "span": list(n.span), "kind": n.kind, "subtype": n.subtype}
                  for n in doc.nodes],
        "edges": [{"child": e.child, "parent": e.parent, "relation": e.relation} for e in doc.edges],
    }
    if doc.dct_text is not None:
        record["dct"] = doc.dct_text
    if doc.domain is not None:
        record["domain"] = doc.domain
    return record


def _field(record: dict, name: str, where: str):
    try:
        return record[name]
    except KeyError:
        raise CorpusError(f"{where}: missing field {name!r}") from None


def document_from_dict(record: dict, where: str = "document") -> Document:
    if not isinstance(record, dict):
        raise CorpusError(f"{where}: expected an object")
    try:
        doc_id = str(_field(record, "id", where))
        where = f"{where} (id {doc_id!r})"
        tokens = [(str(w), str(p)) for w, p in _field(record, "tokens", where)]
        sentences = [(int(s), int(e)) for s, e in _field(record, "sentences", where)]
        nodes = []
        for k, n in enumerate(record.get("nodes", [])):
            subtype = n["subtype"]
            kind = n.get("kind", KIND_OF.get(subtype))
            start, end = n["span"]
            nodes.append(Node(int(n["id"]), (int(start), int(end)), kind, subtype))
        edges = [Edge(int(e["child"]), int(e["parent"]), e["relation"]) for e in record.get("edges", [])]
    except CorpusError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"{where}: malformed field ({exc!r})") from None
    doc = Document(doc_id, tokens, sentences, nodes, edges, record.get("dct"), record.get("domain"))
    validate(doc)
    return assign_sentences(doc)


def dumps_document(doc: Document) -> str:
    return json.dumps(document_to_dict(doc), ensure_ascii=False, separators=(", ", ": "))


def save_documents(path, docs: Iterable[Document]) -> None:
    lines = [dumps_document(d) + "\n" for d in docs]
    Path(path).write_text("".join(lines), encoding="utf-8")


def save_document(path, doc: Document) -> None:
    save_documents(path, [doc])


def load_documents(path) -> list[Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{where}: invalid JSON ({exc.msg})") from None
            docs.append(document_from_dict(record, where))
    return docs


def load_document(path) -> Document:
    docs = load_documents(path)
    if len(docs) != 1:
        raise CorpusError(f"{path}: expected exactly one document, found {len(docs)}")
    return docs[0]
