"""Corpus data model, file format, BIO conversion, splitting and synthesis."""

from .bio import LABELS, LABEL_INDEX, OUTSIDE, bio_decode, bio_encode
from .io import (
    document_from_dict, document_to_dict, dumps_document, load_document, load_documents,
    save_document, save_documents,
)
from .model import (
    DCT, DEPEND_ON, EVENT, EVENT_SUBTYPES, KIND_OF, META, META_IDS, META_NAMES, META_NODES,
    RELATIONS, ROOT, SUBTYPES, TEXT_SUBTYPES, TIME, TIME_SUBTYPES, CorpusError, Document, Edge,
    Node, TemporalTree, assign_sentences, validate,
)
from .split import k_folds, split_corpus
from .synthetic import PROFILES, SynthParams, generate_synthetic

DOMAIN_DEFAULT_RELATION = {"news": "overlap", "grimm": "before"}

__all__ = [
    "DCT", "DEPEND_ON", "DOMAIN_DEFAULT_RELATION", "EVENT", "EVENT_SUBTYPES", "KIND_OF", "LABELS",
    "LABEL_INDEX", "META", "META_IDS", "META_NAMES", "META_NODES", "OUTSIDE", "PROFILES", "RELATIONS",
    "ROOT", "SUBTYPES", "TEXT_SUBTYPES", "TIME", "TIME_SUBTYPES", "CorpusError", "Document", "Edge",
    "Node", "SynthParams", "TemporalTree", "assign_sentences", "bio_decode", "bio_encode",
    "document_from_dict", "document_to_dict", "dumps_document", "generate_synthetic", "k_folds",
    "load_document", "load_documents", "save_document", "save_documents", "split_corpus", "validate",
]
