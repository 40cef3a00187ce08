"""Synthetic temporal dependency corpora with a planted lexical signal.

Each node span carries cue tokens that determine its structure:

* ``r_<relation><k>`` opens every event span and names the gold relation;
* ``a_<target>`` appears when the parent is *not* the immediately
  preceding node, naming where it attaches (a meta node, or ``a_time`` for
  the most recent earlier time expression);
* a subtype trigger (``state1``, ``absoluteconcrete0``, ...) closes the span.

Chained nodes (parent = previous node) carry no anchor cue. Time
expressions attach to earlier time expressions or to meta nodes only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    DCT, EVENT, EVENT_SUBTYPES, META_IDS, TIME, TIME_SUBTYPES, CorpusError, Document, Edge, Node,
    RELATIONS, DEPEND_ON, validate,
)

PROFILES = {
    "news": {
        "relation_dist": {"overlap": 0.6, "includes": 0.15, "before": 0.15, "after": 0.1},
        "p_time": 0.25,
        "far_meta": {"DCT": 0.5, "PresentRef": 0.2, "PastRef": 0.2, "FutureRef": 0.1},
    },
    "grimm": {
        "relation_dist": {"before": 0.5, "overlap": 0.42, "includes": 0.05, "after": 0.03},
        "p_time": 0.08,
        "far_meta": {"PastRef": 0.6, "DCT": 0.2, "PresentRef": 0.1, "FutureRef": 0.1},
    },
}

# Non-chained time expressions attach by subtype.
TIME_ANCHOR = {"AbsoluteConcrete": "Root", "RelativeConcrete": "DCT", "VagueTime": "PresentRef"}
FILLER_POS = ("NN", "VV", "AD", "P", "DEG", "JJ")
QUOTE_OPEN, QUOTE_CLOSE, PERIOD = "“", "”", "。"


@dataclass
class SynthParams:
    n_docs: int = 20
    sentences_per_doc: tuple[int, int] = (3, 6)
    nodes_per_sentence: tuple[int, int] = (1, 3)
    vocab_size: int = 50
    filler_per_gap: tuple[int, int] = (0, 2)
    p_chain: float = 0.7
    profile: str = "news"
    relation_dist: dict[str, float] | None = None
    time_relation_dist: dict[str, float] = field(default_factory=lambda: {DEPEND_ON: 1.0})
    p_time: float | None = None
    event_type_dist: dict[str, float] | None = None
    time_type_dist: dict[str, float] | None = None
    p_far_time: float = 0.3
    p_quote: float = 0.15
    cue_noise: float = 0.0
    triggers_per_type: int = 3

    def resolved(self) -> "SynthParams":
        if self.profile not in PROFILES:
            raise CorpusError(f"unknown profile {self.profile!r}; choose from {sorted(PROFILES)}")
        prof = PROFILES[self.profile]
        p = SynthParams(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        if p.relation_dist is None:
            p.relation_dist = dict(prof["relation_dist"])
        if p.p_time is None:
            p.p_time = prof["p_time"]
        if p.event_type_dist is None:
            p.event_type_dist = {"Event": 0.4, "State": 0.25, "CompletedEvent": 0.1, "ModalizedEvent": 0.07,
                                 "Habitual": 0.06, "OngoingEvent": 0.06, "GenericHabitual": 0.03,
                                 "GenericState": 0.03}
        if p.time_type_dist is None:
            p.time_type_dist = {"VagueTime": 0.3, "AbsoluteConcrete": 0.35, "RelativeConcrete": 0.35}
        p.check()
        return p

    def check(self) -> None:
        for name in ("p_chain", "p_time", "p_far_time", "p_quote", "cue_noise"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise CorpusError(f"{name} must lie in [0, 1], got {value}")
        for name, lo in (("sentences_per_doc", 1), ("nodes_per_sentence", 0), ("filler_per_gap", 0)):
            a, b = getattr(self, name)
            if a < lo or b < a:
                raise CorpusError(f"{name} must be a range ({lo} <= min <= max), got {(a, b)}")
        if self.n_docs < 0 or self.vocab_size < 1 or self.triggers_per_type < 1:
            raise CorpusError("n_docs must be >= 0; vocab_size and triggers_per_type >= 1")
        for name, allowed in (("relation_dist", set(RELATIONS) - {DEPEND_ON}),
                              ("time_relation_dist", set(RELATIONS)),
                              ("event_type_dist", set(EVENT_SUBTYPES)),
                              ("time_type_dist", set(TIME_SUBTYPES))):
            dist = getattr(self, name)
            if not dist or set(dist) - allowed:
                raise CorpusError(f"{name} keys must be drawn from {sorted(allowed)}, got {sorted(dist or {})}")
            if any(not 0.0 <= v <= 1.0 for v in dist.values()) or abs(sum(dist.values()) - 1.0) > 1e-6:
                raise CorpusError(f"{name} must be a probability distribution, got {dist}")


def _draw(rng: np.random.Generator, dist: dict[str, float]) -> str:
    keys = list(dist)
    probs = np.array([dist[k] for k in keys], dtype=float)
    return keys[int(rng.choice(len(keys), p=probs / probs.sum()))]


def relation_cue(relation: str, k: int) -> str:
    return f"r_{relation.replace('-', '')}{k}"


def anchor_cue(target: str) -> str:
    return "a_" + target.lower()


def trigger_word(subtype: str, k: int) -> str:
    return f"{subtype.lower()}{k}"


def _generate_document(rng: np.random.Generator, p: SynthParams, doc_id: str) -> Document:
    tokens: list[tuple[str, str]] = []
    sentences: list[tuple[int, int]] = []
    nodes: list[Node] = []
    edges: list[Edge] = []
    n_sent = int(rng.integers(p.sentences_per_doc[0], p.sentences_per_doc[1] + 1))

    def filler():
        for _ in range(int(rng.integers(p.filler_per_gap[0], p.filler_per_gap[1] + 1))):
            tokens.append((f"w{int(rng.integers(p.vocab_size))}", FILLER_POS[int(rng.integers(len(FILLER_POS)))]))

    for s in range(n_sent):
        start = len(tokens)
        n_nodes = int(rng.integers(p.nodes_per_sentence[0], p.nodes_per_sentence[1] + 1))
        quoted = n_nodes > 0 and rng.random() < p.p_quote
        filler()
        if quoted:
            tokens.append((QUOTE_OPEN, "PU"))
        for j in range(n_nodes):
            if j:
                filler()
            idx = len(nodes)
            prev = nodes[-1] if nodes else None
            if prev is None:
                kind = TIME if rng.random() < p.p_time else EVENT
                parent, anchor = DCT, "DCT"
            elif rng.random() < p.p_chain:
                kind = EVENT if prev.kind == EVENT or rng.random() >= p.p_time else TIME
                parent, anchor = prev.node_id, None
            else:
                kind = TIME if rng.random() < p.p_time else EVENT
                parent = anchor = None
                if kind == EVENT and rng.random() < p.p_far_time:
                    far_times = [n for n in nodes[:-1] if n.kind == TIME]
                    if far_times:
                        parent, anchor = far_times[-1].node_id, "time"
            subtype = _draw(rng, p.event_type_dist if kind == EVENT else p.time_type_dist)
            if parent is None:
                meta = TIME_ANCHOR[subtype] if kind == TIME else _draw(rng, PROFILES[p.profile]["far_meta"])
                parent, anchor = META_IDS[meta], meta
            relation = _draw(rng, p.relation_dist if kind == EVENT else p.time_relation_dist)
            if kind == EVENT and relation == DEPEND_ON:
                raise CorpusError("depend-on is reserved for time expressions")

            span_start = len(tokens)
            if kind == EVENT:
                cue_rel = relation
                if rng.random() < p.cue_noise:
                    cue_rel = _draw(rng, {r: 1.0 / len(p.relation_dist) for r in p.relation_dist})
                tokens.append((relation_cue(cue_rel, int(rng.integers(2))), "AD"))
            if anchor is not None:
                tokens.append((anchor_cue(anchor), "AD"))
            tokens.append((trigger_word(subtype, int(rng.integers(p.triggers_per_type))),
                           "VV" if kind == EVENT else "NT"))
            nodes.append(Node(idx, (span_start, len(tokens)), kind, subtype, s))
            edges.append(Edge(idx, parent, relation))
        if quoted:
            tokens.append((QUOTE_CLOSE, "PU"))
        filler()
        tokens.append((PERIOD, "PU"))
        sentences.append((start, len(tokens)))

    doc = Document(doc_id, tokens, sentences, nodes, edges, dct_text="2018-01-01", domain=p.profile)
    validate(doc)
    return doc


def generate_synthetic(params: SynthParams | None = None, seed: int = 0) -> list[Document]:
    """Generate ``params.n_docs`` valid documents, deterministically from ``seed``."""
    p = (params or SynthParams()).resolved()
    rng = np.random.default_rng(seed)
    return [_generate_document(rng, p, f"synth-{p.profile}-{k:04d}") for k in range(p.n_docs)]
