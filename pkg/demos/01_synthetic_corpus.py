# Synthetic temporal dependency corpora
#
# The generator plants a recoverable signal: each node either attaches to the
# node right before it (probability p_chain) or to a time expression or meta
# node further back, and cue tokens next to each node hint at the relation.

from collections import Counter

from tdparse.corpus import (
    META_NAMES, SynthParams, bio_encode, generate_synthetic, split_corpus,
)

docs = generate_synthetic(SynthParams(n_docs=40, p_chain=0.7), seed=7)
doc = docs[0]
print(doc.id, "-", len(doc.tokens), "tokens,", len(doc.sentences), "sentences,", len(doc.nodes), "nodes")
print(" ".join(doc.words))


# Each node is a typed span; every node has exactly one parent edge.

def name(doc, node_id):
    if node_id in META_NAMES:
        return META_NAMES[node_id]
    n = doc.node_by_id()[node_id]
    return f"{' '.join(doc.words[n.span[0]:n.span[1]])}[{n.subtype}]"


for e in doc.edges:
    print(f"  {name(doc, e.child):<35} --{e.relation}--> {name(doc, e.parent)}")


# The same spans as per-token BIO labels, which is what the stage-1 tagger predicts.

for word, tag in list(zip(doc.words, bio_encode(doc)))[:15]:
    print(f"  {word:<12} {tag}")


# How often is the parent the immediately preceding node?

prev = total = 0
for d in docs:
    order = [n.node_id for n in d.nodes]
    parents = {e.child: e.parent for e in d.edges}
    for a, b in zip(order, order[1:]):
        prev += parents[b] == a
        total += 1
print(f"parent is previous node for {prev / total:.2f} of non-initial nodes")

print(Counter(e.relation for d in docs for e in d.edges))


# Seeded 80/10/10 split.

train, dev, test = split_corpus(docs, seed=0)
print(len(train), len(dev), len(test))
