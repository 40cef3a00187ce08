"""Stage 2: neural ranking parser over time expressions and events."""

from .candidates import (
    ND_CONDITIONS, SS_CONDITIONS, CandidateSet, NodeIndex, extract_candidates, nd_onehot, ss_onehot,
)
from .decoding import Decision, ParseResult, greedy_decode, write_diagnostics
from .model import (
    TYPE_NAMES, VARIANTS, DocEncoding, RankerConfig, RankerModel, attention_repr, node_repr,
    score_candidates,
)
from .training import TrainingLog, decode, evaluate_f, instance_loss, make_instances, rank_train

__all__ = [
    "ND_CONDITIONS", "SS_CONDITIONS", "TYPE_NAMES", "VARIANTS", "CandidateSet", "Decision", "DocEncoding",
    "NodeIndex", "ParseResult", "RankerConfig", "RankerModel", "TrainingLog", "attention_repr", "decode",
    "evaluate_f", "extract_candidates", "greedy_decode", "instance_loss", "make_instances", "nd_onehot",
    "node_repr", "rank_train", "score_candidates", "ss_onehot", "write_diagnostics",
]
