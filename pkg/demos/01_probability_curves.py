"""
Smoothing per-position relevance probabilities
==============================================

Estimate, for one input system, how likely the document at each rank is to be
relevant, then compare the jagged per-position estimate with the
sliding-window average and with the step functions that equal-length
(ProbFuse) and exponentially growing (SegFuse) segments produce.
"""

import numpy as np

from slidefuse import build_profile, emit_probability_curve, split_queries
from slidefuse.baselines import probfuse_train, segfuse_train
from slidefuse.synthetic import make_corpus

###############################################################################
# A synthetic corpus: six systems, 200 queries, incomplete judgments.
corpus = make_corpus(n_queries=200, seed=11)
run = corpus.runs[1]
training, _ = split_queries(corpus.query_ids, 0.10, seed=0, shuffle_index=0)
print(f"{run.system_tag}: training on {len(training)} queries")

###############################################################################
# Raw estimate: relevant hits at each rank over the training queries long
# enough to reach it. With only 20 training queries most ranks see no
# relevant document at all.
profile = build_profile(run, training, corpus.qrels)
raw = np.array([v for _, v in emit_probability_curve(profile)])
print(f"positions with zero estimate: {np.sum(raw == 0)} of {raw.size}")

###############################################################################
# Sliding window of five ranks on either side.
smooth = np.array([v for _, v in emit_probability_curve(profile, w=5)])

###############################################################################
# Segment-based estimates, expanded back to one value per rank.
pf = probfuse_train(run, training, corpus.qrels, x=25)
sf = segfuse_train(run, training, corpus.qrels)
n = raw.size
probfuse_curve = np.array([pf.probability(pf.segment_index(p, n)) for p in range(n)])
segfuse_curve = np.array([sf.probability(sf.segment_index(p, n)) for p in range(n)])

print("\nrank    raw  window  probfuse  segfuse")
for p in (0, 1, 2, 3, 4, 9, 19, 39, 40, 59, 79, 99):
    print(f"{p + 1:4d} {raw[p]:6.3f}  {smooth[p]:6.3f}    {probfuse_curve[p]:6.3f}   {segfuse_curve[p]:6.3f}")

###############################################################################
# Total variation is a rough measure of jaggedness.
for name, curve in [("raw", raw), ("window", smooth), ("probfuse", probfuse_curve), ("segfuse", segfuse_curve)]:
    print(f"{name:>8}: total variation {np.abs(np.diff(curve)).sum():.3f}")
