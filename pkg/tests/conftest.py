import pytest

from slidefuse.corpus_io import Qrels, ResultList, SystemRun
from slidefuse.synthetic import make_corpus


def make_run(tag, lists, scores=None):
    """SystemRun from ``{query_id: [doc ids in rank order]}``."""
    scores = scores or {}
    return SystemRun(tag, {q: ResultList.from_ranking(q, docs, scores.get(q)) for q, docs in lists.items()})


def make_qrels(relevant=(), nonrelevant=()):
    judgments = {pair: True for pair in relevant}
    judgments.update({pair: False for pair in nonrelevant})
    return Qrels(judgments)


@pytest.fixture
def hand_fixture():
    """Three systems, two training queries (T1, T2) and one test query Q with docs x1..x4.

    Raw per-position probabilities after training:
      sysA: [1/2, 1/2, 1/2, 0]   sysB: [1/2, 1/2, 0, 0]   sysC: [0, 0, 1, 1]
    """
    qrels = make_qrels(relevant=[("T1", "d1"), ("T1", "d3"), ("T2", "e2")], nonrelevant=[("T1", "d2")])
    runs = [
        make_run("sysA", {"T1": ["d1", "d2", "d3", "d4"], "T2": ["e1", "e2", "e3", "e4"], "Q": ["x1", "x2", "x3", "x4"]}),
        make_run("sysB", {"T1": ["d2", "d1", "d4"], "T2": ["e2", "e1", "e3", "e4"], "Q": ["x2", "x1", "x3"]}),
        make_run("sysC", {"T1": ["d4", "d2", "d3", "d1"], "T2": ["e3", "e4"], "Q": ["x3", "x4", "x1", "x2"]}),
    ]
    return runs, qrels


@pytest.fixture(scope="session")
def synthetic_corpus():
    return make_corpus(n_queries=200, seed=11)


# Five evaluable queries plus one without relevant judgments ("q6").
# Rankings list doc ids top-down; the hand-computed values use 1-based ranks.
METRIC_RANKINGS = {
    "q1": ["r1", "n1", "r2", "n2"],
    "q2": ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"],
    "q3": ["x1", "x2", "x3"],
    "q4": ["p1", "p2", "u1"],
    "q5": ["u1", "r1", "n1", "u2", "n2", "n3", "r2"],
    "q6": ["z1", "z2"],
}
METRIC_RELEVANT = {
    "q1": ["r1", "r2"],
    "q2": ["b", "e", "i", "zz"],
    "q3": ["y1", "y2", "y3"],
    "q4": ["p1", "p2"],
    "q5": ["r1", "r2", "r3"],
}
METRIC_NONRELEVANT = {
    "q1": ["n1", "n2"],
    "q2": ["a", "c", "j"],
    "q3": ["x1"],
    "q4": [],
    "q5": ["n1", "n2", "n3", "n4"],
    "q6": ["z1"],
}


@pytest.fixture
def metric_fixture():
    qrels = make_qrels(
        relevant=[(q, d) for q, docs in METRIC_RELEVANT.items() for d in docs],
        nonrelevant=[(q, d) for q, docs in METRIC_NONRELEVANT.items() for d in docs],
    )
    run = {q: ResultList.from_ranking(q, docs) for q, docs in METRIC_RANKINGS.items()}
    return run, qrels


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" in getattr(rep, "nodeid", "") and rep.when == "call":
                doc = getattr(rep, "criterion", rep.nodeid.split("::")[-1])
                lines.append((rep.nodeid, f"{'PASS' if outcome == 'passed' else 'FAIL'}  {doc}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = item.get_closest_marker("criterion")
    if crit:
        rep.criterion = crit.args[0]
