"""Comparison systems: attach-to-previous heuristic and a logistic-regression ranker."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .autodiff import Adam, Tensor
from .autodiff import checkpoint as ckpt
from .corpus import (
    DCT, EVENT, RELATIONS, ROOT, TIME, Document, TemporalTree,
)
from .ranker.candidates import NodeIndex
from .ranker.decoding import ParseResult, greedy_decode, unlabeled_edges
from .ranker.training import evaluate_f, make_instances

log = logging.getLogger(__name__)


# --- simple baseline --------------------------------------------------------

def simple_baseline(doc: Document, default_relation: str = "overlap", first_parent: int = DCT) -> ParseResult:
    """Attach each node to the node before it, the first one to ``first_parent``.

    Time expressions attach to the previous time expression instead (or to
    ``first_parent`` when there is none), which keeps the tree corpus-valid.
    """
    tree = TemporalTree()
    prev_any, prev_time = None, None
    for node in doc.nodes:
        if node.kind == TIME:
            parent = prev_time if prev_time is not None else first_parent
            prev_time = node.node_id
        else:
            parent = prev_any if prev_any is not None else first_parent
        tree.parents[node.node_id] = (parent, default_relation)
        prev_any = node.node_id
    kinds = {n.node_id: n.kind for n in doc.nodes}
    return ParseResult(doc.with_edges(unlabeled_edges(tree, default_relation, kinds)), tree)


# --- features -----------------------------------------------------------------

STATIVE = frozenset({"State", "GenericState", "Habitual", "GenericHabitual"})
QUOTE_OPEN = frozenset({"“", "「", "『", "‘"})
QUOTE_CLOSE = frozenset({"”", "」", "』", "’"})
QUOTE_TOGGLE = frozenset({'"'})


def quoted_tokens(doc: Document) -> np.ndarray:
    """True for tokens inside a quotation; an unclosed quotation ends with its sentence."""
    inside = np.zeros(len(doc.tokens), dtype=bool)
    for start, end in doc.sentences:
        depth = 0
        for k in range(start, end):
            w = doc.tokens[k][0]
            if w in QUOTE_OPEN or (w in QUOTE_TOGGLE and depth == 0):
                depth += 1
            elif w in QUOTE_CLOSE or (w in QUOTE_TOGGLE and depth > 0):
                depth = max(0, depth - 1)
            elif depth:
                inside[k] = True
    return inside


def _group_tes(node) -> str:
    if node.is_meta:
        return "meta"
    if node.kind == TIME:
        return "time"
    return "stative" if node.subtype in STATIVE else "eventive"


def _group_rte(node) -> str:
    return "root" if node.is_meta else node.kind


def _group_rtes(node) -> str:
    return "root" if node.is_meta else _group_tes(node)


def distance_bucket(diff: int | None) -> str:
    if diff is None or diff <= 0:
        return "<=0"
    if diff <= 2:
        return str(diff)
    if diff <= 5:
        return "3-5"
    if diff <= 10:
        return "6-10"
    return ">10"


class FeatureContext:
    """Per-document lookups reused across all (child, candidate) pairs."""

    def __init__(self, doc: Document):
        self.doc = doc
        self.index = NodeIndex(doc)
        quoted = quoted_tokens(doc)
        self.quoted = {n.node_id: bool(quoted[n.span[0]]) for n in doc.nodes}
        self.first_in_sentence = {}
        seen = set()
        for n in doc.nodes:
            s = self.index.sentence[n.node_id]
            self.first_in_sentence[n.node_id] = s not in seen
            seen.add(s)


def extract_features(child: int, candidate: int, doc: Document, ctx: FeatureContext | None = None) -> tuple[str, ...]:
    """Active binary features for one (child, candidate) pair, one per template at most."""
    ctx = ctx or FeatureContext(doc)
    idx = ctx.index
    i, y = idx.by_id[child], idx.by_id[candidate]
    diff = idx.node_diff(child, candidate)
    same_sent = idx.same_sentence(child, candidate)
    f = [
        f"type={i.subtype}|{y.subtype}",
        f"tes={_group_tes(i)}|{_group_tes(y)}",
        f"rte={_group_rte(i)}|{_group_rte(y)}",
        f"rtes={_group_rtes(i)}|{_group_rtes(y)}",
        f"dist={distance_bucket(diff)}",
    ]
    if i.subtype == "AbsoluteConcrete" and candidate == ROOT:
        f.append("abs_time->root")
    if i.kind == TIME and candidate == ROOT:
        f.append("time->root")
    both_events = i.kind == EVENT and y.kind == EVENT
    if both_events:
        lo, hi = sorted((idx.position[child], idx.position[candidate]))
        between = idx.nodes[lo + 1:hi]
        if between and all(n.subtype == "State" for n in between):
            f.append("events_with_states_between")
    if same_sent:
        f.append("same_sentence")
    if diff == 1:
        f.append("diff=1")
    if i.subtype == "State" and not same_sent:
        f.append("state&diff_sentence")
    if i.subtype == "State" and diff == 1:
        f.append("state&diff=1")
    if both_events and diff == 1:
        f.append("event_event&diff=1")
    if (i.subtype == "State" and y.kind == EVENT and diff == 1 and ctx.first_in_sentence[child]
            and idx.sentence[child] != 0):
        f.append("state->event&diff=1&first_in_sentence&not_first_sentence")
    if not y.is_meta and ctx.quoted[child] and ctx.quoted[candidate]:
        f.append("both_quoted")
    return tuple(sorted(f))


# --- logistic regression ranker ----------------------------------------------------

@dataclass
class LogRegConfig:
    mode: str = "labeled"
    relations: tuple[str, ...] = RELATIONS
    default_relation: str = "overlap"
    l2: float = 1e-4
    learning_rate: float = 0.01
    max_epochs: int = 50
    patience: int = 5
    relation_mask: bool = True

    def __post_init__(self):
        self.relations = tuple(self.relations)
        if self.mode not in ("unlabeled", "labeled"):
            raise ValueError(f"mode must be 'unlabeled' or 'labeled', got {self.mode!r}")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.relations if self.mode == "labeled" else (self.default_relation,)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["relations"] = list(self.relations)
        return d


class LogRegModel:
    """Linear scorer ``w_r . phi(child, candidate) + b_r`` per relation label."""

    def __init__(self, config: LogRegConfig, feature_map: dict[str, int]):
        self.config = config
        self.feature_map = dict(feature_map)
        n_labels = len(config.labels)
        self.weights = Tensor(np.zeros((len(feature_map), n_labels)), requires_grad=True, name="weights")
        self.bias = Tensor(np.zeros(n_labels), requires_grad=True, name="bias")

    def feature_ids(self, features) -> np.ndarray:
        return np.array([self.feature_map[k] for k in features if k in self.feature_map], dtype=np.int64)

    def pair_ids(self, ctx: FeatureContext, child: int, cands) -> list[np.ndarray]:
        return [self.feature_ids(extract_features(child, c, ctx.doc, ctx)) for c in cands]

    def score_ids(self, ids: list[np.ndarray]) -> np.ndarray:
        w = self.weights.data
        return np.array([w[k].sum(axis=0) for k in ids]) + self.bias.data

    def to_checkpoint(self) -> ckpt.Checkpoint:
        features = sorted(self.feature_map, key=self.feature_map.get)
        return ckpt.Checkpoint("logistic", self.config.to_dict(), {"features": features},
                               {"weights": self.weights.data, "bias": self.bias.data})

    @classmethod
    def from_checkpoint(cls, c: ckpt.Checkpoint) -> "LogRegModel":
        if c.kind != "logistic":
            raise ckpt.CheckpointError(f"expected a logistic checkpoint, got {c.kind!r}")
        model = cls(LogRegConfig(**c.hyperparameters),
                    {k: i for i, k in enumerate(c.vocabularies["features"])})
        model.weights.data[...] = c.tensors["weights"]
        model.bias.data[...] = c.tensors["bias"]
        return model


def logreg_decode(model: LogRegModel, doc: Document) -> ParseResult:
    c = model.config
    ctx = FeatureContext(doc)

    def scorer(child, cset, index):
        return model.score_ids(model.pair_ids(ctx, child, cset.candidates))

    result = greedy_decode(doc, scorer, c.labels, mask_relations=c.relation_mask and c.mode == "labeled")
    if c.mode == "unlabeled":
        kinds = {n.node_id: n.kind for n in doc.nodes}
        result.document = doc.with_edges(unlabeled_edges(result.tree, c.default_relation, kinds))
    return result


def _softmax_grad(scores: np.ndarray, gold: int) -> np.ndarray:
    flat = scores.reshape(-1)
    p = np.exp(flat - flat.max())
    p /= p.sum()
    p[gold] -= 1.0
    return p.reshape(scores.shape)


def logreg_train(train: list[Document], dev: list[Document], config: LogRegConfig | None = None,
                 seed: int = 0) -> LogRegModel:
    """Softmax ranking over candidates (x relations) with a linear scorer, trained by Adam."""
    config = config or LogRegConfig()
    if not train:
        raise ValueError("logreg_train: empty training set")
    labeled = config.mode == "labeled"
    data = []
    keys: set[str] = set()
    for doc in train:
        ctx = FeatureContext(doc)
        instances, skipped = make_instances(doc, config.labels, labeled)
        for inst in instances:
            feats = [extract_features(inst.child, c, doc, ctx) for c in inst.candidates]
            keys.update(k for fs in feats for k in fs)
            data.append((feats, inst.gold))
    model = LogRegModel(config, {k: i for i, k in enumerate(sorted(keys))})
    data = [([model.feature_ids(fs) for fs in feats], gold) for feats, gold in data]
    opt = Adam([model.weights, model.bias], learning_rate=config.learning_rate)
    rng = np.random.default_rng(seed)
    best, best_f, bad = None, -1.0, 0
    model.history = []
    for epoch in range(1, config.max_epochs + 1):
        total = 0.0
        for k in rng.permutation(len(data)):
            ids, gold = data[k]
            scores = model.score_ids(ids)
            d_scores = _softmax_grad(scores, gold)
            flat = scores.reshape(-1)
            total += float(np.log(np.exp(flat - flat.max()).sum()) + flat.max() - flat[gold])
            opt.zero_grad()
            for row, d in zip(ids, d_scores):
                np.add.at(model.weights.grad, row, d)
            model.weights.grad += config.l2 * model.weights.data
            model.bias.grad += d_scores.sum(axis=0)
            opt.step()
        record = {"epoch": epoch, "loss": total}
        if dev:
            f = evaluate_f(model, dev, labeled, decode_fn=logreg_decode)
            record["dev_f"] = f
            if f > best_f:
                best_f, best, bad = f, (model.weights.data.copy(), model.bias.data.copy()), 0
            else:
                bad += 1
        model.history.append(record)
        if dev and bad >= config.patience:
            break
    if best is not None:
        model.weights.data[...], model.bias.data[...] = best
    return model
