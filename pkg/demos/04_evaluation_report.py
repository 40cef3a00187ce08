# Reading an evaluation report
#
# Scores are micro-averaged over documents. Edges are matched by the spans
# of child and parent, so predictions over automatic spans are scored
# against gold without any alignment step.

from tdparse.baselines import simple_baseline
from tdparse.corpus import SynthParams, generate_synthetic
from tdparse.evaluation import evaluation_report, format_report

gold = generate_synthetic(SynthParams(n_docs=20, p_chain=0.7, profile="grimm"), seed=3)

# attach-to-previous with the narrative default relation
pred = [simple_baseline(d, "before").document for d in gold]
report = evaluation_report(gold, pred)
print(format_report(report))


# The confusion matrices are also available as plain data.

cm = report["parent_locality_confusion"]
far_row = dict(zip(cm["labels"], cm["counts"][1]))
print("gold far parents predicted as:", far_row)
