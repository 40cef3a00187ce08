"""Documents, nodes, edges and temporal dependency trees."""

from __future__ import annotations

from dataclasses import dataclass, field

META = "meta"
TIME = "time"
EVENT = "event"

TIME_SUBTYPES = ("VagueTime", "AbsoluteConcrete", "RelativeConcrete")
EVENT_SUBTYPES = (
    "Event", "State", "Habitual", "CompletedEvent", "OngoingEvent",
    "ModalizedEvent", "GenericHabitual", "GenericState",
)
TEXT_SUBTYPES = TIME_SUBTYPES + EVENT_SUBTYPES

# Reserved ordinals; candidate lists put meta nodes first in this order.
META_IDS = {"Root": -5, "PastRef": -4, "PresentRef": -3, "FutureRef": -2, "DCT": -1}
META_NAMES = {v: k for k, v in META_IDS.items()}
ROOT, DCT = META_IDS["Root"], META_IDS["DCT"]

SUBTYPES = {META: tuple(META_IDS), TIME: TIME_SUBTYPES, EVENT: EVENT_SUBTYPES}
KIND_OF = {s: k for k, subs in SUBTYPES.items() for s in subs}

RELATIONS = ("before", "after", "overlap", "includes", "depend-on")
DEPEND_ON = "depend-on"


class CorpusError(ValueError):
    """Malformed document or violated corpus invariant."""


@dataclass(frozen=True)
class Node:
    node_id: int
    span: tuple[int, int] | None
    kind: str
    subtype: str
    sent_id: int | None = None

    @property
    def is_meta(self) -> bool:
        return self.kind == META


@dataclass(frozen=True)
class Edge:
    child: int
    parent: int
    relation: str


META_NODES = tuple(Node(i, None, META, name) for name, i in META_IDS.items())


@dataclass
class Document:
    id: str
    tokens: list[tuple[str, str]]
    sentences: list[tuple[int, int]]
    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    dct_text: str | None = None
    domain: str | None = None

    @property
    def words(self) -> list[str]:
        return [w for w, _ in self.tokens]

    @property
    def pos_tags(self) -> list[str]:
        return [p for _, p in self.tokens]

    @property
    def meta_nodes(self) -> tuple[Node, ...]:
        return META_NODES

    def all_nodes(self) -> list[Node]:
        return list(META_NODES) + list(self.nodes)

    def node_by_id(self) -> dict[int, Node]:
        return {n.node_id: n for n in self.all_nodes()}

    def sentence_of(self, token: int) -> int:
        for k, (start, end) in enumerate(self.sentences):
            if start <= token < end:
                return k
        raise CorpusError(f"document {self.id}: token {token} outside every sentence")

    def tree(self) -> "TemporalTree":
        return TemporalTree.from_edges(self.edges)

    def with_nodes(self, nodes: list[Node], edges: list[Edge] | None = None) -> "Document":
        return Document(self.id, list(self.tokens), list(self.sentences), list(nodes),
                        list(edges or []), self.dct_text, self.domain)

    def with_edges(self, edges: list[Edge]) -> "Document":
        return self.with_nodes(self.nodes, edges)


@dataclass
class TemporalTree:
    """child id -> (parent id, relation); meta nodes hang off an implicit root."""

    parents: dict[int, tuple[int, str]] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, edges) -> "TemporalTree":
        tree = cls()
        for e in edges:
            if e.child in tree.parents:
                raise CorpusError(f"node {e.child} has more than one parent")
            tree.parents[e.child] = (e.parent, e.relation)
        return tree

    def edges(self) -> list[Edge]:
        return [Edge(c, p, r) for c, (p, r) in sorted(self.parents.items())]

    def parent(self, child: int) -> int | None:
        entry = self.parents.get(child)
        return None if entry is None else entry[0]

    def is_ancestor(self, ancestor: int, node: int) -> bool:
        """True when ``ancestor`` lies on the parent chain above ``node`` (or equals it)."""
        seen = 0
        while node is not None:
            if node == ancestor:
                return True
            node = self.parent(node)
            seen += 1
            if seen > len(self.parents) + 1:
                raise CorpusError("cycle in temporal tree")
        return False

    def find_cycle(self) -> int | None:
        for start in self.parents:
            seen = {start}
            node = self.parent(start)
            while node is not None:
                if node in seen:
                    return node
                seen.add(node)
                node = self.parent(node)
        return None


def sentence_ids(doc: Document) -> list[int]:
    return [doc.sentence_of(n.span[0]) for n in doc.nodes]


def assign_sentences(doc: Document) -> Document:
    """Fill in ``sent_id`` for every node from the document's sentence spans."""
    doc.nodes = [Node(n.node_id, n.span, n.kind, n.subtype, doc.sentence_of(n.span[0]))
                 for n in doc.nodes]
    return doc


def validate(doc: Document) -> None:
    """Check every document and tree invariant; raise :class:`CorpusError` on failure.

    ``edges`` may be empty (an unparsed document); otherwise they must form a
    complete temporal tree over the text nodes.
    """
    where = f"document {doc.id!r}"
    n_tok = len(doc.tokens)
    pos = 0
    for k, (start, end) in enumerate(doc.sentences):
        if start != pos or end <= start:
            raise CorpusError(f"{where}: sentence {k} span [{start},{end}) does not continue the partition at {pos}")
        pos = end
    if pos != n_tok:
        raise CorpusError(f"{where}: sentences cover {pos} tokens but document has {n_tok}")

    prev_id, prev_end = None, 0
    for n in doc.nodes:
        if n.kind not in (TIME, EVENT):
            raise CorpusError(f"{where}: node {n.node_id} has invalid kind {n.kind!r}")
        if n.subtype not in SUBTYPES[n.kind]:
            raise CorpusError(f"{where}: node {n.node_id} subtype {n.subtype!r} inconsistent with kind {n.kind!r}")
        if n.node_id < 0:
            raise CorpusError(f"{where}: node id {n.node_id} collides with reserved meta ids")
        if prev_id is not None and n.node_id <= prev_id:
            raise CorpusError(f"{where}: node ids not strictly increasing at {n.node_id}")
        if n.span is None or not 0 <= n.span[0] < n.span[1] <= n_tok:
            raise CorpusError(f"{where}: node {n.node_id} has invalid span {n.span}")
        if n.span[0] < prev_end:
            raise CorpusError(f"{where}: node {n.node_id} span {n.span} overlaps or precedes the previous node")
        sent = doc.sentence_of(n.span[0])
        if doc.sentence_of(n.span[1] - 1) != sent:
            raise CorpusError(f"{where}: node {n.node_id} span {n.span} crosses a sentence boundary")
        if n.sent_id is not None and n.sent_id != sent:
            raise CorpusError(f"{where}: node {n.node_id} sent_id {n.sent_id} != {sent}")
        prev_id, prev_end = n.node_id, n.span[1]

    if not doc.edges:
        return
    by_id = doc.node_by_id()
    for e in doc.edges:
        if e.child not in by_id:
            raise CorpusError(f"{where}: edge references unknown child node {e.child}")
        if e.parent not in by_id:
            raise CorpusError(f"{where}: edge references unknown parent node {e.parent}")
        child, parent = by_id[e.child], by_id[e.parent]
        if child.is_meta:
            raise CorpusError(f"{where}: meta node {e.child} cannot be a child")
        if e.parent == e.child:
            raise CorpusError(f"{where}: node {e.child} is its own parent")
        if e.relation not in RELATIONS:
            raise CorpusError(f"{where}: unknown relation {e.relation!r}")
        if e.relation == DEPEND_ON and child.kind != TIME:
            raise CorpusError(f"{where}: depend-on edge on non-time child {e.child}")
        if child.kind == TIME and parent.kind == EVENT:
            raise CorpusError(f"{where}: time expression {e.child} attached to event {e.parent}")
    tree = TemporalTree.from_edges(doc.edges)
    missing = [n.node_id for n in doc.nodes if n.node_id not in tree.parents]
    if missing:
        raise CorpusError(f"{where}: nodes without a parent: {missing}")
    cyc = tree.find_cycle()
    if cyc is not None:
        raise CorpusError(f"{where}: cycle through node {cyc}")
