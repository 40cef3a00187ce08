"""Frozen three-document gold/prediction pair with hand-computed metric counts.

doc a: gold spans reused; one relation error on a correct parent, one wrong parent.
doc b: predicted spans; one subtype error on a matched span, one shifted span.
doc c: gold spans reused; attach-to-previous with overlap everywhere.
"""

from tdparse.corpus import DCT, ROOT, Edge, META_IDS

from conftest import make_doc

PRESENT = META_IDS["PresentRef"]


def metric_fixture():
    a_nodes = [(0, 1, "AbsoluteConcrete"), (2, 3, "Event"), (4, 5, "State"), (6, 7, "Event")]
    a_gold = make_doc([8], a_nodes, "a", [Edge(0, ROOT, "depend-on"), Edge(1, 0, "includes"),
                                          Edge(2, 1, "overlap"), Edge(3, 1, "before")])
    a_pred = make_doc([8], a_nodes, "a", [Edge(0, ROOT, "depend-on"), Edge(1, 0, "overlap"),
                                          Edge(2, 1, "overlap"), Edge(3, 2, "before")])

    b_gold = make_doc([4, 4], [(0, 2, "Event"), (3, 4, "VagueTime"), (5, 6, "Event")], "b",
                      [Edge(0, DCT, "before"), Edge(1, PRESENT, "depend-on"), Edge(2, 0, "after")])
    b_pred = make_doc([4, 4], [(0, 2, "State"), (3, 4, "VagueTime"), (6, 7, "Event")], "b",
                      [Edge(0, DCT, "before"), Edge(1, PRESENT, "depend-on"), Edge(2, 0, "after")])

    c_nodes = [(0, 1, "Event"), (2, 3, "Event"), (4, 5, "Event")]
    c_gold = make_doc([6], c_nodes, "c", [Edge(0, DCT, "overlap"), Edge(1, 0, "overlap"),
                                          Edge(2, 0, "before")])
    c_pred = make_doc([6], c_nodes, "c", [Edge(0, DCT, "overlap"), Edge(1, 0, "overlap"),
                                          Edge(2, 1, "overlap")])
    return [a_gold, b_gold, c_gold], [a_pred, b_pred, c_pred]


# (correct, predicted, gold)
EXPECTED_SPANS = {
    "label": {"AbsoluteConcrete": (1, 1, 1), "Event": (5, 6, 7), "State": (1, 2, 1),
              "VagueTime": (1, 1, 1), "overall": (8, 10, 10)},
    "binary": {"event": (7, 8, 8), "time": (2, 2, 2), "overall": (9, 10, 10)},
    "span": {"span": (9, 10, 10), "overall": (9, 10, 10)},
}
EXPECTED_UNLABELED = (7, 10, 10)
EXPECTED_LABELED = (6, 10, 10)
# rows gold, columns predicted, order (pre, far)
EXPECTED_LOCALITY = [[3, 0], [2, 0]]
EXPECTED_LOCALITY_EXCLUDED = 2
EXPECTED_LOCALITY_COVERAGE = 5 / 7
# order: before, after, overlap, includes, depend-on
EXPECTED_RELATIONS = [
    [1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0],
    [0, 0, 3, 0, 0],
    [0, 0, 1, 0, 0],
    [0, 0, 0, 0, 2],
]
EXPECTED_RELATIONS_EXCLUDED = 2
