"""
Fusing result lists and scoring the output
==========================================

Train on a tenth of the queries, fuse the remaining ones with SlideFuse and the
three baselines, and score each fused run with MAP, bpref and P10.
"""

from slidefuse.experiments import fuse_split, split_queries
from slidefuse.metrics import evaluate_run
from slidefuse.synthetic import make_corpus

corpus = make_corpus(n_queries=200, seed=11)
training, test = split_queries(corpus.query_ids, 0.10, seed=42, shuffle_index=0)

###############################################################################
# One call trains ProbFuse, SegFuse and SlideFuse on the training queries and
# fuses every test query with all four methods. CombMNZ needs no training.
fused = fuse_split(corpus.runs, corpus.qrels, training, test, w=5, segments=25)

print(f"{'':10} {'MAP':>7} {'bpref':>7} {'P10':>7}")
for algorithm, runs in fused.items():
    scores = evaluate_run(runs, corpus.qrels)
    print(f"{algorithm:10} {scores['map'].mean:7.4f} {scores['bpref'].mean:7.4f} {scores['P10'].mean:7.4f}")

###############################################################################
# The top of one fused list, with each document's summed window probability.
q = test[0]
print(f"\nquery {q}, SlideFuse top 5:")
for doc, score in fused["SlideFuse"][q].entries[:5]:
    mark = "relevant" if corpus.qrels.is_relevant(q, doc) else ""
    print(f"  {doc:10} {score:.4f} {mark}")
