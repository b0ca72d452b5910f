"""Sliding-window probabilistic data fusion with CombMNZ, ProbFuse and SegFuse baselines."""

from .baselines import (
    SegmentProfile,
    combmnz,
    normalize_scores,
    probfuse_fuse,
    probfuse_train,
    segfuse_fuse,
    segfuse_train,
)
from .corpus_io import (
    ParseError,
    Qrels,
    RankedEntry,
    ResultList,
    SystemRun,
    parse_qrels,
    parse_run_file,
    read_qrels,
    read_run_file,
    write_run_file,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    coefficient_of_variation,
    load_config,
    paired_t_test,
    run_experiment,
    split_queries,
    training_size_sweep,
)
from .metrics import MetricScores, average_precision, bpref, evaluate_run, p10
from .profiles import RelevanceProfile, build_profile, emit_probability_curve, raw_probability
from .sliding import FusedList, FusionEnsemble, Window, fuse, fuse_all, window_bounds, window_probability

__version__ = "0.1.0"
