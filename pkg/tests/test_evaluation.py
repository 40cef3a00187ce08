import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import fixtures as fx
from conftest import make_doc
from tdparse.corpus import DCT, CorpusError, Edge, SynthParams, generate_synthetic
from tdparse.evaluation import (
    PRF, attachment_prf, dumps_report, evaluation_report, format_report, parent_locality_confusion,
    relation_confusion, span_prf,
)


def counts(prf):
    return (prf.correct, prf.predicted, prf.gold)


# --- PRF --------------------------------------------------------------------

def test_prf_formula():
    s = PRF(1, 1, 2)
    assert (s.precision, s.recall) == (1.0, 0.5)
    assert s.f1 == pytest.approx(2 / 3, abs=1e-15)
    assert PRF().f1 == 0.0


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_prf_bounds(c, extra_p, extra_g):
    s = PRF(c, c + extra_p, c + extra_g)
    for v in (s.precision, s.recall, s.f1):
        assert 0.0 <= v <= 1.0
    assert min(s.precision, s.recall) - 1e-12 <= s.f1 <= max(s.precision, s.recall) + 1e-12


# --- frozen fixture ---------------------------------------------------------

@pytest.mark.parametrize("mode", ["label", "binary", "span"])
def test_fixture_span_counts(mode):
    gold, pred = fx.metric_fixture()
    got = {k: counts(v) for k, v in span_prf(gold, pred, mode).items()}
    assert got == fx.EXPECTED_SPANS[mode]


def test_fixture_overall_is_sum_over_labels():
    gold, pred = fx.metric_fixture()
    scores = span_prf(gold, pred, "label")
    total = PRF()
    for k, v in scores.items():
        if k != "overall":
            total = total + v
    assert counts(total) == counts(scores["overall"])


def test_fixture_attachment_counts():
    gold, pred = fx.metric_fixture()
    assert counts(attachment_prf(gold, pred, labeled=False)) == fx.EXPECTED_UNLABELED
    assert counts(attachment_prf(gold, pred, labeled=True)) == fx.EXPECTED_LABELED


def test_fixture_locality_confusion():
    gold, pred = fx.metric_fixture()
    cm = parent_locality_confusion(gold, pred)
    assert cm.labels == ("pre", "far")
    assert cm.counts.tolist() == fx.EXPECTED_LOCALITY
    assert cm.excluded == fx.EXPECTED_LOCALITY_EXCLUDED
    assert cm.coverage == pytest.approx(fx.EXPECTED_LOCALITY_COVERAGE, abs=1e-15)
    assert cm.total == cm.row_totals.sum() == cm.col_totals.sum() == 5


def test_fixture_relation_confusion():
    gold, pred = fx.metric_fixture()
    cm = relation_confusion(gold, pred)
    assert cm.counts.tolist() == fx.EXPECTED_RELATIONS
    assert cm.excluded == fx.EXPECTED_RELATIONS_EXCLUDED


def test_gold_spans_give_equal_precision_and_recall():
    gold, pred = fx.metric_fixture()
    for labeled in (False, True):
        s = attachment_prf([gold[0], gold[2]], [pred[0], pred[2]], labeled)
        assert s.predicted == s.gold
        assert s.precision == s.recall == s.f1


# --- constructed examples -------------------------------------------------------

def test_identical_sets_score_one():
    docs = generate_synthetic(SynthParams(n_docs=3), seed=1)
    assert span_prf(docs, docs)["overall"].f1 == 1.0
    assert attachment_prf(docs, docs, labeled=True).f1 == 1.0
    assert parent_locality_confusion(docs, docs).counts[0, 1] == 0
    assert parent_locality_confusion(docs, docs).counts[1, 0] == 0
    cm = relation_confusion(docs, docs)
    assert np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0


def test_span_must_match_exactly():
    gold = make_doc([3], [(0, 2, "Event")])
    pred = make_doc([3], [(0, 1, "Event")])
    assert counts(span_prf(gold, pred)["overall"]) == (0, 1, 1)


def test_three_of_four_edges():
    nodes = [(k, k + 1, "Event") for k in range(4)]
    gold = make_doc([4], nodes, edges=[Edge(0, DCT, "before"), Edge(1, 0, "before"),
                                       Edge(2, 1, "before"), Edge(3, 2, "before")])
    pred = gold.with_edges([Edge(0, DCT, "before"), Edge(1, 0, "before"),
                            Edge(2, 1, "before"), Edge(3, 0, "before")])
    s = attachment_prf(gold, pred)
    assert s.precision == s.recall == s.f1 == 0.75


def test_previous_node_predictor_moves_far_mass_to_pre():
    docs = generate_synthetic(SynthParams(n_docs=20, p_chain=0.7, p_time=0.4, p_far_time=1.0), seed=3)
    preds = []
    for d in docs:
        edges = [Edge(n.node_id, DCT if k == 0 else d.nodes[k - 1].node_id, "overlap")
                 for k, n in enumerate(d.nodes)]
        preds.append(d.with_edges(edges))
    cm = parent_locality_confusion(docs, preds)
    assert cm.counts[1, 1] == 0 and cm.counts[1, 0] > 0
    assert cm.counts[0, 1] == 0


def test_all_overlap_predictor_fills_one_column():
    docs = generate_synthetic(SynthParams(n_docs=10), seed=4)
    preds = [d.with_edges([Edge(e.child, e.parent, "overlap") for e in d.edges]) for d in docs]
    cm = relation_confusion(docs, preds)
    assert (cm.counts.sum(axis=0) > 0).tolist() == [False, False, True, False, False]
    assert len({e.relation for d in docs for e in d.edges}) > 1


def test_id_mismatch_is_an_error():
    gold, pred = fx.metric_fixture()
    with pytest.raises(CorpusError, match="gold only \\['c'\\]"):
        attachment_prf(gold, pred[:2])


def test_report_formats():
    gold, pred = fx.metric_fixture()
    report = evaluation_report(gold, pred)
    assert report["attachment"]["unlabeled"]["f1"] == pytest.approx(0.7, abs=1e-15)
    assert json.loads(dumps_report(report)) == json.loads(json.dumps(report))
    text = format_report(report)
    assert "micro" in text and "Relation confusion" in text
    assert "coverage 0.714" in text
