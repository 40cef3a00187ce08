# End-to-end: tag spans, then parse over the predicted spans
#
# Stage 2 is trained on predicted spans: gold edges are projected onto the
# tagger's output, and unmatched predictions fall back to DCT.

from tdparse.corpus import SynthParams, generate_synthetic, split_corpus
from tdparse.evaluation import attachment_prf, span_prf
from tdparse.ranker import RankerConfig, decode, rank_train
from tdparse.tagger import MappingStats, TaggerConfig, map_gold_edges, tag_predict, tag_train

docs = generate_synthetic(SynthParams(n_docs=30), seed=4)
train, dev, test = split_corpus(docs, seed=0)

# small dimensions keep this quick; the defaults are 256/32/256/256
tagger = tag_train(train, dev, TaggerConfig(word_dim=64, pos_dim=16, lstm_dim=64, hidden_dim=64,
                                            max_epochs=15), seed=0)
tagged = [tag_predict(tagger, d) for d in test]
spans = span_prf(test, tagged, mode="label")["overall"]
print(f"stage 1 exact-match span f {spans.f1:.3f}")

mapped, stats = [], MappingStats()
for d in train:
    doc, s = map_gold_edges(d, tag_predict(tagger, d))
    mapped.append(doc)
    stats = stats + s
print(stats)

parser = rank_train(mapped, dev, RankerConfig(max_epochs=15), seed=0)
parsed = [decode(parser, d).document for d in tagged]
for labeled in (False, True):
    s = attachment_prf(test, parsed, labeled=labeled)
    print(f"{'labeled' if labeled else 'unlabeled'} end-to-end p {s.precision:.3f} r {s.recall:.3f} f {s.f1:.3f}")
