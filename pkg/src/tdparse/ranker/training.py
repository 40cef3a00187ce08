"""Training loop and decoding entry point for the neural ranker."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Adam, Tape, ops
from ..corpus import Document
from ..evaluation import attachment_prf
from .candidates import NodeIndex, extract_candidates
from .decoding import ParseResult, greedy_decode, unlabeled_edges
from .model import RankerConfig, RankerModel

log = logging.getLogger(__name__)


@dataclass
class TrainingLog:
    epochs: list[dict] = field(default_factory=list)
    skipped: int = 0
    best_epoch: int = 0
    best_dev_f: float | None = None


@dataclass
class Instance:
    doc: Document
    child: int
    candidates: tuple[int, ...]
    gold: int  # index into the flattened candidate-major score vector


def make_instances(doc: Document, labels: tuple[str, ...], labeled: bool) -> tuple[list[Instance], int]:
    """Training instances for every child whose gold parent (and relation) is reachable."""
    index = NodeIndex(doc)
    gold = {e.child: (e.parent, e.relation) for e in doc.edges}
    out, skipped = [], 0
    for node in doc.nodes:
        parent, relation = gold[node.node_id]
        cset = extract_candidates(doc, node.node_id, index)
        if parent not in cset.candidates or (labeled and relation not in labels):
            skipped += 1
            continue
        k = cset.candidates.index(parent) * len(labels)
        if labeled:
            k += labels.index(relation)
        out.append(Instance(doc, node.node_id, cset.candidates, k))
    return out, skipped


def instance_loss(model: RankerModel, inst: Instance, word_ids=None):
    enc = model.encode(inst.doc, word_ids)
    scores = model.score_matrix(enc, inst.child, inst.candidates)
    return ops.cross_entropy(ops.reshape(scores, (scores.shape[0] * scores.shape[1],)), inst.gold)


def decode(model: RankerModel, doc: Document) -> ParseResult:
    """Greedy constrained parse of ``doc``'s nodes."""
    c = model.config
    enc = model.encode(doc) if doc.nodes else None

    def scorer(child, cset, index):
        return model.score_matrix(enc, child, cset.candidates).data

    result = greedy_decode(doc, scorer, c.labels, mask_relations=c.relation_mask and c.mode == "labeled")
    if c.mode == "unlabeled":
        kinds = {n.node_id: n.kind for n in doc.nodes}
        result.document = doc.with_edges(unlabeled_edges(result.tree, c.default_relation, kinds))
    return result


def evaluate_f(model, docs: list[Document], labeled: bool, decode_fn=decode) -> float:
    if not docs:
        return 0.0
    parsed = [decode_fn(model, d).document for d in docs]
    return attachment_prf(docs, parsed, labeled=labeled).f1


def _unk_ids(model: RankerModel, doc: Document, singletons: set[str], p: float, rng) -> list[int]:
    ids = model.word_ids(doc)
    if p > 0:
        for k, w in enumerate(doc.words):
            if w in singletons and rng.random() < p:
                ids[k] = 0
    return ids


def rank_train(train: list[Document], dev: list[Document], config: RankerConfig | None = None,
               seed: int = 0) -> RankerModel:
    """Train with one Adam step per child node; early-stop on dev attachment f.

    With an empty ``dev`` set the model trains for ``config.max_epochs`` and
    the final parameters are returned. The returned model carries a
    ``training_log`` attribute.
    """
    config = config or RankerConfig()
    if not train:
        raise ValueError("rank_train: empty training set")
    counts = Counter(w for d in train for w in d.words)
    vocab = sorted(counts)
    singletons = {w for w, n in counts.items() if n == 1}
    model = RankerModel(config, vocab, seed)
    labeled = config.mode == "labeled"
    instances, skipped = [], 0
    for d in train:
        inst, s = make_instances(d, config.labels, labeled)
        instances += inst
        skipped += s
    history = TrainingLog(skipped=skipped)
    if skipped:
        log.warning("skipped %d training instances whose gold parent is outside the candidate set", skipped)
    opt = Adam(model.parameters(), learning_rate=config.learning_rate)
    rng = np.random.default_rng(seed + 1)
    best_state, best_f, bad_epochs = None, -1.0, 0
    by_doc: dict[str, list[Instance]] = {}
    for inst in instances:
        by_doc.setdefault(inst.doc.id, []).append(inst)
    doc_ids = list(by_doc)

    for epoch in range(1, config.max_epochs + 1):
        total = 0.0
        for k in rng.permutation(len(doc_ids)):
            for inst in by_doc[doc_ids[k]]:
                ids = _unk_ids(model, inst.doc, singletons, config.unk_prob, rng)
                opt.zero_grad()
                with Tape() as tape:
                    loss = instance_loss(model, inst, ids)
                    tape.backward(loss)
                total += loss.item()
                opt.step()
        record = {"epoch": epoch, "loss": total}
        if dev:
            f = evaluate_f(model, dev, labeled)
            record["dev_f"] = f
            if f > best_f:
                best_f, best_state, bad_epochs = f, model.state_dict(), 0
                history.best_epoch, history.best_dev_f = epoch, f
            else:
                bad_epochs += 1
        history.epochs.append(record)
        log.info("epoch %d loss %.4f dev_f %s", epoch, total, record.get("dev_f"))
        if dev and (bad_epochs >= config.patience
                    or (config.target_f is not None and best_f >= config.target_f)):
            break
    if best_state is not None:
        model.load_state_dict(best_state)
    else:
        history.best_epoch = len(history.epochs)
    model.training_log = history
    return model
