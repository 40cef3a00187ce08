"""Stage 1: Bi-LSTM BIO tagger for time expressions and events.

Tokens are represented by the concatenation of word and POS embeddings,
run through a sentence-level Bi-LSTM, and scored per token by an MLP over
the 23 BIO labels. Decoding is a per-token argmax followed by BIO repair.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass

import numpy as np

from .autodiff import Adam, BiLSTM, MLP, Embedding, Module, Tape, Tensor, ops
from .autodiff import checkpoint as ckpt
from .corpus import (
    DCT, DOMAIN_DEFAULT_RELATION, KIND_OF, LABEL_INDEX, LABELS, CorpusError, Document, Edge, Node,
    TemporalTree, bio_decode, bio_encode,
)
from .evaluation import span_prf

log = logging.getLogger(__name__)

UNK = "<unk>"
FALLBACK_POS = "NOUN"


@dataclass
class TaggerConfig:
    word_dim: int = 256
    pos_dim: int = 32
    lstm_dim: int = 256
    hidden_dim: int = 256
    learning_rate: float = 0.001
    max_epochs: int = 30
    patience: int = 5
    unk_prob: float = 0.25
    target_f: float | None = None

    def __post_init__(self):
        for name in ("word_dim", "pos_dim", "lstm_dim", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lstm_dim % 2:
            raise ValueError(f"lstm_dim must be even, got {self.lstm_dim}")


class FallbackPosTagger:
    """Most frequent training tag per word, else ``NOUN``."""

    def __init__(self, table: dict[str, str] | None = None):
        self.table = dict(table or {})

    @classmethod
    def fit(cls, docs: list[Document]) -> "FallbackPosTagger":
        counts: dict[str, Counter] = defaultdict(Counter)
        for d in docs:
            for w, p in d.tokens:
                counts[w][p] += 1
        # ties broken alphabetically for determinism
        return cls({w: min(c.items(), key=lambda kv: (-kv[1], kv[0]))[0] for w, c in counts.items()})

    def tag(self, words: list[str]) -> list[str]:
        return [self.table.get(w, FALLBACK_POS) for w in words]


class TaggerModel(Module):
    def __init__(self, config: TaggerConfig, words: list[str], tags: list[str], seed: int = 0):
        super().__init__()
        self.config = config
        self.words = [UNK] + [w for w in words if w != UNK]
        self.tags = [UNK] + [t for t in tags if t != UNK]
        self.word_index = {w: k for k, w in enumerate(self.words)}
        self.tag_index = {t: k for k, t in enumerate(self.tags)}
        rng = np.random.default_rng(seed)
        c = config
        self.word_emb = self.add_module("word_emb", Embedding(rng, len(self.words), c.word_dim))
        self.pos_emb = self.add_module("pos_emb", Embedding(rng, len(self.tags), c.pos_dim))
        self.bilstm = self.add_module("bilstm", BiLSTM(rng, c.word_dim + c.pos_dim, c.lstm_dim))
        self.mlp = self.add_module("mlp", MLP(rng, c.lstm_dim, c.hidden_dim, len(LABELS)))

    def ids(self, tokens) -> tuple[list[int], list[int]]:
        return ([self.word_index.get(w, 0) for w, _ in tokens],
                [self.tag_index.get(p, 0) for _, p in tokens])

    def scores(self, word_ids, pos_ids) -> Tensor:
        x = ops.concat([self.word_emb(word_ids), self.pos_emb(pos_ids)], axis=1)
        return self.mlp(self.bilstm(x))

    def to_checkpoint(self) -> ckpt.Checkpoint:
        return ckpt.Checkpoint("tagger", asdict(self.config),
                               {"words": self.words, "pos": self.tags, "labels": list(LABELS)},
                               self.state_dict())

    @classmethod
    def from_checkpoint(cls, c: ckpt.Checkpoint) -> "TaggerModel":
        if c.kind != "tagger":
            raise ckpt.CheckpointError(f"expected a tagger checkpoint, got {c.kind!r}")
        if tuple(c.vocabularies["labels"]) != LABELS:
            raise ckpt.CheckpointError("checkpoint label inventory differs from this version")
        model = cls(TaggerConfig(**c.hyperparameters), c.vocabularies["words"], c.vocabularies["pos"])
        model.load_state_dict(c.tensors)
        return model


def sentence_instances(doc: Document) -> list[tuple[list[tuple[str, str]], list[int]]]:
    tags = bio_encode(doc)
    return [(doc.tokens[s:e], [LABEL_INDEX[t] for t in tags[s:e]]) for s, e in doc.sentences]


def tag_predict(model: TaggerModel, doc: Document) -> Document:
    """Copy of ``doc`` with nodes replaced by predicted spans (and no edges)."""
    if not doc.tokens:
        raise CorpusError(f"document {doc.id!r} has no tokens to tag")
    nodes = []
    for sent_id, (start, end) in enumerate(doc.sentences):
        word_ids, pos_ids = model.ids(doc.tokens[start:end])
        scores = model.scores(word_ids, pos_ids).data
        labels = [LABELS[k] for k in np.argmax(scores, axis=1)]
        for s, e, subtype in bio_decode(labels):
            nodes.append(Node(len(nodes), (start + s, start + e), KIND_OF[subtype], subtype, sent_id))
    return doc.with_nodes(nodes)


def span_f(model: TaggerModel, docs: list[Document]) -> float:
    if not docs:
        return 0.0
    return span_prf(docs, [tag_predict(model, d) for d in docs], mode="label")["overall"].f1


def tag_train(train: list[Document], dev: list[Document], config: TaggerConfig | None = None,
              seed: int = 0) -> TaggerModel:
    """One Adam step per sentence; early stopping on dev exact-match span f.

    Without dev documents the model trains for ``config.max_epochs`` and the
    last parameters are kept. Per-epoch records are stored on
    ``model.history``.
    """
    config = config or TaggerConfig()
    if not train:
        raise ValueError("tag_train: empty training set")
    counts = Counter(w for d in train for w in d.words)
    singletons = {w for w, n in counts.items() if n == 1}
    model = TaggerModel(config, sorted(counts), sorted({p for d in train for p in d.pos_tags}), seed)
    instances = [inst for d in train for inst in sentence_instances(d)]
    opt = Adam(model.parameters(), learning_rate=config.learning_rate)
    rng = np.random.default_rng(seed + 1)
    model.history = []
    best_state, best_f, bad = None, -1.0, 0
    for epoch in range(1, config.max_epochs + 1):
        total = 0.0
        for k in rng.permutation(len(instances)):
            tokens, gold = instances[k]
            word_ids, pos_ids = model.ids(tokens)
            if config.unk_prob > 0:
                for j, (w, _) in enumerate(tokens):
                    if w in singletons and rng.random() < config.unk_prob:
                        word_ids[j] = 0
            opt.zero_grad()
            with Tape() as tape:
                loss = ops.cross_entropy_rows(model.scores(word_ids, pos_ids), gold)
                tape.backward(loss)
            total += loss.item()
            opt.step()
        record = {"epoch": epoch, "loss": total}
        if dev:
            f = span_f(model, dev)
            record["dev_f"] = f
            if f > best_f:
                best_f, best_state, bad = f, model.state_dict(), 0
            else:
                bad += 1
        model.history.append(record)
        log.info("epoch %d loss %.4f dev_f %s", epoch, total, record.get("dev_f"))
        if dev and (bad >= config.patience or (config.target_f is not None and best_f >= config.target_f)):
            break
    if best_state is not None:
        model.load_state_dict(best_state)
    return model


# --- stage 2 training data from predicted spans --------------------------------

@dataclass
class MappingStats:
    predicted: int = 0
    matched: int = 0
    unmatched: int = 0
    parent_fallbacks: int = 0
    cycle_repairs: int = 0

    def __add__(self, other: "MappingStats") -> "MappingStats":
        return MappingStats(*(a + b for a, b in zip(asdict(self).values(), asdict(other).values())))


def _overlap(a, b) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]))


def map_gold_edges(gold: Document, predicted: Document,
                   default_relation: str | None = None) -> tuple[Document, MappingStats]:
    """Project gold edges onto predicted spans.

    A predicted node inherits the edge of the gold node of the same kind it
    overlaps most (earliest on ties). Its parent becomes the predicted node
    matched to the gold parent; predicted nodes without a match, or whose
    gold parent has no predicted counterpart, attach to DCT with the domain
    default relation.
    """
    default_relation = default_relation or DOMAIN_DEFAULT_RELATION.get(gold.domain, "overlap")
    gold_parent = {e.child: (e.parent, e.relation) for e in gold.edges}
    stats = MappingStats(predicted=len(predicted.nodes))
    match: dict[int, int] = {}
    for p in predicted.nodes:
        best, best_ov = None, 0
        for g in gold.nodes:
            ov = _overlap(p.span, g.span)
            if ov > best_ov and g.kind == p.kind:
                best, best_ov = g.node_id, ov
        if best is not None:
            match[p.node_id] = best
    gold_to_pred: dict[int, int] = {}
    for pid, gid in match.items():
        gold_to_pred.setdefault(gid, pid)

    tree = TemporalTree()
    for p in predicted.nodes:
        gid = match.get(p.node_id)
        if gid is None or gid not in gold_parent:
            stats.unmatched += 1
            tree.parents[p.node_id] = (DCT, default_relation)
            continue
        stats.matched += 1
        gp, relation = gold_parent[gid]
        if gp < 0:
            parent = gp
        elif gold_to_pred.get(gp, p.node_id) != p.node_id:
            parent = gold_to_pred[gp]
        else:
            stats.parent_fallbacks += 1
            parent, relation = DCT, default_relation
        tree.parents[p.node_id] = (parent, relation)
    while (node := tree.find_cycle()) is not None:
        stats.cycle_repairs += 1
        tree.parents[node] = (DCT, default_relation)
    kinds = {n.node_id: n.kind for n in predicted.nodes}
    edges = []
    for e in tree.edges():
        relation = e.relation
        if relation == "depend-on" and kinds[e.child] != "time":
            relation = "overlap"
        edges.append(Edge(e.child, e.parent, relation))
    return predicted.with_edges(edges), stats
