import numpy as np
import pytest

from conftest import make_doc
from tdparse.autodiff import checkpoint as ckpt
from tdparse.baselines import (
    FeatureContext, LogRegConfig, LogRegModel, distance_bucket, extract_features, logreg_decode,
    logreg_train, quoted_tokens, simple_baseline,
)
from tdparse.corpus import (
    DCT, ROOT, TEXT_SUBTYPES, Edge, SynthParams, generate_synthetic, validate,
)
from tdparse.evaluation import attachment_prf


# --- simple baseline ------------------------------------------------------------

def test_simple_baseline_chains_events():
    doc = make_doc([5], [(0, 1, "Event"), (2, 3, "Event"), (4, 5, "Event")])
    edges = simple_baseline(doc, "overlap").document.edges
    assert edges == [Edge(0, DCT, "overlap"), Edge(1, 0, "overlap"), Edge(2, 1, "overlap")]


def test_simple_baseline_empty_doc():
    assert simple_baseline(make_doc([2], [])).document.edges == []


def test_simple_baseline_time_children_stay_valid():
    doc = make_doc([6], [(0, 1, "Event"), (1, 2, "AbsoluteConcrete"), (2, 3, "Event"),
                         (3, 4, "VagueTime")])
    result = simple_baseline(doc)
    validate(result.document)
    parents = {e.child: e.parent for e in result.document.edges}
    assert parents == {0: DCT, 1: DCT, 2: 1, 3: 1}


def test_simple_baseline_exact_on_chained_corpus():
    params = SynthParams(n_docs=10, p_chain=1.0, relation_dist={"overlap": 1.0})
    docs = generate_synthetic(params, seed=0)
    preds = [simple_baseline(d, "overlap").document for d in docs]
    assert attachment_prf(docs, preds, labeled=False).f1 == 1.0


# --- features -------------------------------------------------------------

def test_distance_buckets():
    assert [distance_bucket(d) for d in (None, -3, 0, 1, 2, 3, 5, 6, 10, 11)] == \
        ["<=0", "<=0", "<=0", "1", "2", "3-5", "3-5", "6-10", "6-10", ">10"]


def test_state_diff_one_combination():
    doc = make_doc([4], [(0, 1, "Event"), (2, 3, "State")])
    assert "state&diff=1" in extract_features(1, 0, doc)
    assert "state&diff=1" not in extract_features(1, DCT, doc)


def test_quotation_feature():
    words = ["he", "said", '"', "run", "and", "hide", '"', "."]
    doc = make_doc([8], [(1, 2, "Event"), (3, 4, "Event"), (5, 6, "Event")], words=words)
    assert quoted_tokens(doc).tolist() == [False, False, False, True, True, True, False, False]
    assert "both_quoted" in extract_features(2, 1, doc)
    assert "both_quoted" not in extract_features(1, 0, doc)


def test_intervening_state_feature():
    doc = make_doc([6], [(0, 1, "Event"), (2, 3, "State"), (4, 5, "Event")])
    assert "events_with_states_between" in extract_features(2, 0, doc)
    assert "events_with_states_between" not in extract_features(1, 0, doc)


def test_root_time_features_and_purity():
    doc = make_doc([3], [(0, 1, "AbsoluteConcrete")])
    f = extract_features(0, ROOT, doc)
    assert {"abs_time->root", "time->root", "type=AbsoluteConcrete|Root"} <= set(f)
    assert f == extract_features(0, ROOT, doc, FeatureContext(doc))


def test_first_in_later_sentence_state_feature():
    doc = make_doc([2, 2], [(0, 1, "Event"), (2, 3, "State")])
    assert "state->event&diff=1&first_in_sentence&not_first_sentence" in extract_features(1, 0, doc)


# --- logistic regression ----------------------------------------------------

def test_separable_data_fits_perfectly():
    params = SynthParams(n_docs=8, p_chain=1.0, relation_dist={"overlap": 1.0})
    docs = generate_synthetic(params, seed=1)
    model = logreg_train(docs, [], LogRegConfig(mode="unlabeled", max_epochs=20), seed=0)
    preds = [logreg_decode(model, d).document for d in docs]
    assert attachment_prf(docs, preds).f1 == 1.0


def test_zero_weights_pick_earliest_candidate():
    doc = make_doc([4], [(0, 1, "Event"), (2, 3, "Event")])
    model = LogRegModel(LogRegConfig(), {"same_sentence": 0})
    result = logreg_decode(model, doc)
    assert {(e.parent, e.relation) for e in result.document.edges} == {(ROOT, "before")}
    np.testing.assert_allclose(result.decisions[0].probabilities[result.decisions[0].allowed],
                               1.0 / result.decisions[0].allowed.sum())


def test_dct_weights_give_flat_tree():
    docs = generate_synthetic(SynthParams(n_docs=5, p_time=0.0), seed=2)
    keys = sorted({f"type={s}|DCT" for s in TEXT_SUBTYPES})
    model = LogRegModel(LogRegConfig(mode="unlabeled"), {k: i for i, k in enumerate(keys)})
    model.weights.data[...] = 10.0
    for d in docs:
        result = logreg_decode(model, d)
        validate(result.document)
        assert {e.parent for e in result.document.edges} == {DCT}


def test_logreg_deterministic_and_round_trips(tmp_path):
    docs = generate_synthetic(SynthParams(n_docs=4), seed=3)
    a = logreg_train(docs, docs[:1], LogRegConfig(max_epochs=3), seed=7)
    b = logreg_train(docs, docs[:1], LogRegConfig(max_epochs=3), seed=7)
    assert ckpt.dumps(a.to_checkpoint()) == ckpt.dumps(b.to_checkpoint())
    ckpt.save(tmp_path / "m.ckpt", a.to_checkpoint())
    c = LogRegModel.from_checkpoint(ckpt.load(tmp_path / "m.ckpt"))
    for d in docs:
        assert logreg_decode(c, d).document.edges == logreg_decode(a, d).document.edges


def test_logreg_single_label_reduces_to_unlabeled():
    docs = generate_synthetic(SynthParams(n_docs=5), seed=4)
    base = logreg_train(docs, [], LogRegConfig(mode="unlabeled", max_epochs=2), seed=0)
    lab = LogRegModel(LogRegConfig(mode="labeled", relations=("overlap",)), base.feature_map)
    lab.weights.data[...] = base.weights.data
    lab.bias.data[...] = base.bias.data
    for d in docs:
        assert logreg_decode(lab, d).document.edges == logreg_decode(base, d).document.edges


def test_logreg_rejects_empty_training_set():
    with pytest.raises(ValueError):
        logreg_train([], [])
