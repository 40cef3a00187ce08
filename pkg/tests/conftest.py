import numpy as np
import pytest

from tdparse.corpus import DCT, KIND_OF, Document, Edge, Node, assign_sentences
from tdparse.ranker import RankerConfig, RankerModel

TINY = dict(word_dim=4, type_dim=3, lstm_dim=4, hidden_dim=5)


def make_doc(sentence_lengths, node_specs, doc_id="fx", edges=None, words=None):
    """Build a document from sentence lengths and (start, end, subtype) node specs."""
    n_tok = sum(sentence_lengths)
    words = words or [f"t{k}" for k in range(n_tok)]
    tokens = [(w, "NN") for w in words]
    sentences, pos = [], 0
    for n in sentence_lengths:
        sentences.append((pos, pos + n))
        pos += n
    nodes = [Node(k, (s, e), KIND_OF[sub], sub) for k, (s, e, sub) in enumerate(node_specs)]
    doc = Document(doc_id, tokens, sentences, nodes, edges or [])
    return assign_sentences(doc)


def three_node():
    """Two sentences, a time expression and two events, with a gold tree."""
    edges = [Edge(0, DCT, "depend-on"), Edge(1, 0, "includes"), Edge(2, 1, "before")]
    return make_doc([4, 3], [(0, 1, "RelativeConcrete"), (1, 3, "Event"), (4, 6, "State")], edges=edges)


@pytest.fixture
def three_node_doc():
    return three_node()


def randomize(model, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    for p in model.parameters():
        p.data[...] = rng.normal(scale=scale, size=p.shape)
    return model


def tiny_model(doc, variant="attention", mode="labeled", seed=0, **kw):
    config = RankerConfig(variant=variant, mode=mode, **(TINY | kw))
    return RankerModel(config, sorted(set(doc.words)), seed=seed)
