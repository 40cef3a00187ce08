"""Neural ranking model: document Bi-LSTM, node and pair representations, MLP scorer."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..autodiff import BiLSTM, MLP, Embedding, Module, Tensor, ops
from ..autodiff import checkpoint as ckpt
from ..autodiff.nn import uniform_param
from ..corpus import META_IDS, RELATIONS, TEXT_SUBTYPES, Document
from .candidates import CandidateSet, NodeIndex, nd_onehot, ss_onehot

VARIANTS = ("basic", "enriched", "attention")
MODES = ("unlabeled", "labeled")
TYPE_NAMES = tuple(META_IDS) + TEXT_SUBTYPES
TYPE_INDEX = {t: k for k, t in enumerate(TYPE_NAMES)}
UNK = "<unk>"
N_DISTANCE = 6  # 4 node-distance + 2 same-sentence conditions


@dataclass
class RankerConfig:
    variant: str = "attention"
    mode: str = "labeled"
    relations: tuple[str, ...] = RELATIONS
    word_dim: int = 32
    type_dim: int = 16
    lstm_dim: int = 32
    hidden_dim: int = 32
    attention_margin: int = 0
    relation_mask: bool = True
    default_relation: str = "overlap"
    learning_rate: float = 0.001
    max_epochs: int = 50
    patience: int = 5
    unk_prob: float = 0.25
    target_f: float | None = None

    def __post_init__(self):
        self.relations = tuple(self.relations)
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.relations or set(self.relations) - set(RELATIONS):
            raise ValueError(f"relations must be a non-empty subset of {RELATIONS}")
        for name in ("word_dim", "type_dim", "lstm_dim", "hidden_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lstm_dim % 2:
            raise ValueError(f"lstm_dim must be even, got {self.lstm_dim}")
        if self.attention_margin < 0:
            raise ValueError("attention_margin must be >= 0")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.relations if self.mode == "labeled" else (self.default_relation,)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["relations"] = list(self.relations)
        return d


@dataclass
class DocEncoding:
    """Per-document forward state: node rows are meta nodes first, then textual order."""

    index: NodeIndex
    words: Tensor                # (T, lstm_dim) Bi-LSTM outputs
    x: Tensor                    # (n_meta + n_text, lstm_dim) summed span encodings
    x_hat: Tensor | None         # same layout, attention-weighted
    types: np.ndarray            # type index per row
    spans: np.ndarray = field(default=None)


def span_matrix(spans, n_tokens: int, margin: int = 0) -> np.ndarray:
    s = np.zeros((len(spans), n_tokens))
    for r, (start, end) in enumerate(spans):
        s[r, max(0, start - margin):min(n_tokens, end + margin)] = 1.0
    return s


class RankerModel(Module):
    def __init__(self, config: RankerConfig, vocab: list[str], seed: int = 0):
        super().__init__()
        self.config = config
        self.vocab = [UNK] + [w for w in vocab if w != UNK]
        self.word_index = {w: k for k, w in enumerate(self.vocab)}
        rng = np.random.default_rng(seed)
        c = config
        self.word_emb = self.add_module("word_emb", Embedding(rng, len(self.vocab), c.word_dim))
        self.bilstm = self.add_module("bilstm", BiLSTM(rng, c.word_dim, c.lstm_dim))
        self.meta_emb = self.add_param("meta_emb", uniform_param(rng, (len(META_IDS), c.lstm_dim), "meta_emb"))
        self.type_emb = None
        self.attention = None
        if c.variant != "basic":
            self.type_emb = self.add_module("type_emb", Embedding(rng, len(TYPE_NAMES), c.type_dim))
        if c.variant == "attention":
            self.attention = self.add_param("attention", uniform_param(rng, (c.lstm_dim,), "attention"))
        self.mlp = self.add_module("mlp", MLP(rng, self.pair_dim, c.hidden_dim, len(c.labels)))

    @property
    def pair_dim(self) -> int:
        c = self.config
        dim = 2 * c.lstm_dim
        if c.variant != "basic":
            dim += 2 * c.type_dim + N_DISTANCE
        if c.variant == "attention":
            dim += 2 * c.lstm_dim
        return dim

    def word_ids(self, doc: Document) -> list[int]:
        return [self.word_index.get(w, 0) for w in doc.words]

    # --- forward ----------------------------------------------------------

    def encode(self, doc: Document, word_ids=None) -> DocEncoding:
        index = NodeIndex(doc)
        ids = self.word_ids(doc) if word_ids is None else word_ids
        words = self.bilstm(self.word_emb(ids))
        spans = [n.span for n in index.nodes]
        n_tok = len(ids)
        rows = [self.meta_emb]
        if spans:
            rows.append(ops.matmul(Tensor(span_matrix(spans, n_tok)), words))
        x = ops.concat(rows, axis=0)
        x_hat = None
        if self.attention is not None:
            rows = [self.meta_emb]
            if spans:
                alpha = ops.tanh(ops.matvec(words, self.attention))
                grid = ops.matmul(Tensor(np.ones((len(spans), 1))), ops.reshape(alpha, (1, n_tok)))
                weights = ops.softmax(grid, axis=1,
                                      mask=span_matrix(spans, n_tok, self.config.attention_margin) > 0)
                rows.append(ops.matmul(weights, words))
            x_hat = ops.concat(rows, axis=0)
        types = np.array([TYPE_INDEX[n.subtype] for n in list(doc.meta_nodes) + index.nodes])
        return DocEncoding(index, words, x, x_hat, types, np.array(spans).reshape(-1, 2))

    def distance_features(self, enc: DocEncoding, child: int, cands) -> np.ndarray:
        return np.array([np.concatenate([nd_onehot(enc.index, child, c), ss_onehot(enc.index, child, c)])
                         for c in cands])

    def pair_matrix(self, enc: DocEncoding, child: int, cands) -> Tensor:
        """Stacked pair representations g, one row per candidate."""
        rows = [enc.index.row[c] for c in cands]
        crow = [enc.index.row[child]] * len(rows)
        parts = [ops.lookup(enc.x, crow), ops.lookup(enc.x, rows)]
        if self.type_emb is not None:
            parts += [self.type_emb(enc.types[crow]), self.type_emb(enc.types[rows]),
                      Tensor(self.distance_features(enc, child, cands))]
        if enc.x_hat is not None:
            parts += [ops.lookup(enc.x_hat, crow), ops.lookup(enc.x_hat, rows)]
        return ops.concat(parts, axis=1)

    def pair_representation(self, enc: DocEncoding, child: int, cand: int) -> np.ndarray:
        """Single pair vector g assembled entry by entry (no batching)."""
        r_c, r_p = enc.index.row[child], enc.index.row[cand]
        parts = [enc.x.data[r_c], enc.x.data[r_p]]
        if self.type_emb is not None:
            table = self.type_emb.weight.data
            parts += [table[enc.types[r_c]], table[enc.types[r_p]],
                      nd_onehot(enc.index, child, cand), ss_onehot(enc.index, child, cand)]
        if enc.x_hat is not None:
            parts += [enc.x_hat.data[r_c], enc.x_hat.data[r_p]]
        return np.concatenate(parts)

    def score_matrix(self, enc: DocEncoding, child: int, cands) -> Tensor:
        """Scores of shape (n_candidates, n_labels)."""
        return self.mlp(self.pair_matrix(enc, child, cands))

    def scores(self, enc: DocEncoding, cset: CandidateSet) -> Tensor:
        """c_i: flattened candidate-major, label-minor."""
        s = self.score_matrix(enc, cset.child, cset.candidates)
        return ops.reshape(s, (s.shape[0] * s.shape[1],))

    # --- persistence --------------------------------------------------------

    def to_checkpoint(self, extra: dict | None = None) -> ckpt.Checkpoint:
        return ckpt.Checkpoint("ranker", self.config.to_dict(), {"words": self.vocab},
                               self.state_dict(), extra or {})

    @classmethod
    def from_checkpoint(cls, c: ckpt.Checkpoint) -> "RankerModel":
        if c.kind != "ranker":
            raise ckpt.CheckpointError(f"expected a ranker checkpoint, got {c.kind!r}")
        config = RankerConfig(**c.hyperparameters)
        model = cls(config, c.vocabularies["words"])
        model.load_state_dict(c.tensors)
        return model


def node_repr(enc: DocEncoding, node_id: int) -> np.ndarray:
    return enc.x.data[enc.index.row[node_id]]


def attention_repr(enc: DocEncoding, node_id: int) -> np.ndarray:
    if enc.x_hat is None:
        raise ValueError("attention representations need the attention variant")
    return enc.x_hat.data[enc.index.row[node_id]]


def score_candidates(model: RankerModel, doc: Document, cset: CandidateSet,
                     enc: DocEncoding | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(c_i, o_i)`` for one child, without relation or cycle masking."""
    enc = enc or model.encode(doc)
    c = model.scores(enc, cset).data
    e = np.exp(c - c.max())
    return c, e / e.sum()
