# Training the stage-2 ranking parser
#
# For each child node the model scores every (candidate parent, relation)
# pair and a softmax over the candidate list is trained with cross-entropy.
# Here the three encoder variants are compared against the two baselines.

import time

from tdparse.baselines import LogRegConfig, logreg_decode, logreg_train, simple_baseline
from tdparse.corpus import SynthParams, generate_synthetic, split_corpus
from tdparse.evaluation import attachment_prf
from tdparse.ranker import RankerConfig, decode, rank_train

docs = generate_synthetic(SynthParams(n_docs=60, p_chain=0.7), seed=1)
train, dev, test = split_corpus(docs, seed=0)


def score(preds):
    u = attachment_prf(test, preds, labeled=False).f1
    l = attachment_prf(test, preds, labeled=True).f1
    return f"unlabeled {u:.3f}  labeled {l:.3f}"


print("simple baseline   ", score([simple_baseline(d, "overlap").document for d in test]))

lr = logreg_train(train, dev, LogRegConfig(), seed=0)
print("logistic          ", score([logreg_decode(lr, d).document for d in test]))

for variant in ("basic", "enriched", "attention"):
    start = time.perf_counter()
    model = rank_train(train, dev, RankerConfig(variant=variant, max_epochs=20), seed=0)
    log = model.training_log
    print(f"{variant:<18}", score([decode(model, d).document for d in test]),
          f"  best epoch {log.best_epoch}, {time.perf_counter() - start:.0f}s")


# The per-epoch record kept during training.

for rec in log.epochs[:5]:
    print(rec)


# Decisions expose the candidate distribution behind each attachment.

result = decode(model, test[0])
d = result.decisions[0]
best = d.probabilities.argmax()
print(f"node {d.child}: {len(d.candidates)} candidates x {len(d.labels)} labels,"
      f" chose parent {d.parent} ({d.relation}) with p={d.probabilities[best]:.2f}")
