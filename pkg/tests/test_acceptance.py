"""Acceptance gate: one group of tests per criterion, each tagged with ``criterion(n)``.

The experiment criteria (6 to 9) share runs through a module-level cache and use
master seed 0, fixed before any run was looked at. Run alone with
``pytest tests/test_acceptance.py -v``; the terminal summary prints one PASS/FAIL
line per criterion.
"""
import functools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from areba.bench import ExperimentConfig, run_experiment
from areba.evaluation import PrequentialState
from areba.learners import AREBAQueues, ClassSizeTracker, QBRQueues
from areba.nn import NetworkConfig, init_network
from areba.stream import ConceptSpec, DriftSpec, LabeledExample, StreamConfig, synthetic_stream

from oracles import faded_sums, fuzz_queues

MASTER_SEED = 0
SINE = ConceptSpec("sine")
STEPS = 5000
ONSET = 2500

LEARNERS = {
    "AREBA_20": dict(learner="areba", memory=20),
    "AREBA_2": dict(learner="areba", memory=2),
    "OOB_single": dict(learner="oob", ensemble=1),
    "AdaptiveCS": dict(learner="adaptive_cs"),
    "Sliding": dict(learner="sliding", window=100),
    "Baseline": dict(learner="baseline"),
}
NON_AREBA = ("OOB_single", "AdaptiveCS", "Sliding", "Baseline")

SCENARIOS = {
    "stationary": dict(drift=DriftSpec()),
    "posterior": dict(drift=DriftSpec("posterior", ONSET)),
    "posterior_noise": dict(drift=DriftSpec("posterior", ONSET), noise_prob=0.1),
    "prior": dict(drift=DriftSpec("prior", ONSET)),
    "likelihood": dict(drift=DriftSpec("likelihood", ONSET)),
}


def detail(request, text):
    request.node.user_properties.append(("detail", text))


@functools.lru_cache(maxsize=None)
def sine_run(scenario, label, reps=10):
    stream = StreamConfig(SINE, 0.01, steps=STEPS, **SCENARIOS[scenario])
    return run_experiment(ExperimentConfig(stream=stream, reps=reps, seed=MASTER_SEED, **LEARNERS[label]))


def final_gmean(result):
    return result.final()["gmean"]


def fmt(results):
    return ", ".join(f"{k} {m:.3f}±{s:.3f}" for k, (m, s) in results.items())


# ---------------------------------------------------------------- criterion 1


@pytest.mark.criterion(1, "tracker identity s_p + s_n = 1 - 0.99^t")
def test_tracker_identity(request):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(10**4):
        tr = ClassSizeTracker(0.99)
        for y in rng.integers(0, 2, int(rng.integers(1, 200))).tolist():
            tr.update(y)
        worst = max(worst, abs(tr.s_p + tr.s_n - (1 - 0.99**tr.t)))
    elapsed = time.perf_counter() - start
    detail(request, f"max deviation {worst:.2e} over 10^4 sequences in {elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 1.0


# ---------------------------------------------------------------- criterion 2


@pytest.mark.criterion(2, "QBR/AREBA queues match the replay oracle on 10^5-step fuzz streams")
def test_queue_fuzz(request):
    start = time.perf_counter()
    failures = []
    combos = 0
    for ci in (0.5, 0.1, 0.01):
        for drift in ("none", "prior", "likelihood", "posterior"):
            cfg = StreamConfig(SINE, ci, DriftSpec(drift, 50_000), steps=100_000, seed=combos)
            stream = synthetic_stream(cfg)
            for kind in ("qbr", "areba"):
                failures += [f"{kind} CI={ci} {drift}: {f}" for f in fuzz_queues(kind, 20, stream)]
                combos += 1
    elapsed = time.perf_counter() - start
    detail(request, f"{combos} streams x 10^5 steps, {len(failures)} failures, {elapsed:.1f}s")
    assert failures == []
    assert elapsed < 10.0


# ---------------------------------------------------------------- criterion 3


def tenth_positive_stream(steps=102):
    return [LabeledExample(np.array([t / 1000.0, 0.5]), int(t % 10 == 0 and 10 <= t <= 100), 0) for t in range(steps)]


@pytest.mark.criterion(3, "worked-example traces for QBR (B=10, t=100) and AREBA (t = 9, 10, 20, 101)")
def test_qbr_worked_trace(request):
    stream = tenth_positive_stream()
    qs = QBRQueues(10)
    first_balanced = None
    for t, e in enumerate(stream[:101]):
        qs.observe(e)
        if first_balanced is None and qs.caps == (5, 5) and len(qs.q_n) == len(qs.q_p) == 5:
            first_balanced = t
    detail(request, f"QBR at t=100: caps {qs.caps}, both queues full; first full at (5,5) at t={first_balanced}")
    assert qs.caps == (5, 5)
    assert [e for e in qs.q_n] == stream[95:100]
    assert [e for e in qs.q_p] == stream[60:101:10]


@pytest.mark.criterion(3, "worked-example traces for QBR (B=10, t=100) and AREBA (t = 9, 10, 20, 101)")
def test_areba_worked_trace(request):
    stream = tenth_positive_stream()
    qs = AREBAQueues(10)
    caps = {}
    for t, e in enumerate(stream):
        qs.observe(e)
        caps[t] = (qs.q_n.cap, None if qs.q_p.is_empty() else qs.q_p.cap)
    seq = [caps[t] for t in (9, 10, 20, 101)]
    detail(request, f"AREBA caps (n, p) at t=9,10,20,101: {seq}")
    assert seq == [(10, None), (1, 2), (2, 3), (5, 5)]
    assert len(qs.q_n) == len(qs.q_p) == 5


# ---------------------------------------------------------------- criterion 4


@pytest.mark.criterion(4, "backprop matches central differences on a 2-4-1 network")
def test_gradient_check(request):
    start = time.perf_counter()
    rng = np.random.default_rng(4)
    net = init_network(NetworkConfig((2, 4, 1), l2=0.01), rng)
    worst = 0.0
    h = 1e-6
    for _ in range(10):
        n = int(rng.integers(1, 16))
        X, y, w = rng.random((n, 2)), rng.integers(0, 2, n), rng.uniform(0.5, 20.0, n)
        _, grad = net.loss_and_grad(X, y, w)
        base = net.params.copy()
        numeric = np.empty_like(base)
        for i in range(base.size):
            step = np.zeros_like(base)
            step[i] = h
            net.set_params(base + step)
            up = net.cost(X, y, w)
            net.set_params(base - step)
            numeric[i] = (up - net.cost(X, y, w)) / (2 * h)
        net.set_params(base)
        rel = np.abs(grad - numeric) / np.maximum(1e-8, np.abs(grad) + np.abs(numeric))
        worst = max(worst, float(rel.max()))
        net.train_batch(X, y, w)
    elapsed = time.perf_counter() - start
    detail(request, f"max relative error {worst:.2e} in {elapsed:.2f}s")
    assert worst < 1e-4
    assert elapsed < 1.0


# ---------------------------------------------------------------- criterion 5


@pytest.mark.criterion(5, "fading accumulators equal direct weighted sums")
def test_prequential_oracle(request):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(5):
        ys = rng.integers(0, 2, 1000)
        y_hats = rng.integers(0, 2, 1000)
        state = PrequentialState(0.99)
        for t in range(1000):
            state.update(int(ys[t]), int(y_hats[t]))
            ref = faded_sums(ys[: t + 1], y_hats[: t + 1], 0.99)
            worst = max(worst, *(abs(getattr(state, k) - v) for k, v in ref.items()))
    detail(request, f"max deviation {worst:.2e} over 5 x 10^3 steps")
    assert worst <= 1e-12


# ---------------------------------------------------------------- criterion 6


@pytest.mark.slow
@pytest.mark.criterion(6, "stationary Sine CI=1%: AREBA_20 > AREBA_2 > the rest, AREBA_20 beyond 2 combined SE")
def test_stationary_ordering(request):
    res = {k: final_gmean(sine_run("stationary", k)) for k in LEARNERS}
    detail(request, fmt(res))
    a20, a2 = res["AREBA_20"], res["AREBA_2"]
    assert a20[0] > a2[0]
    assert all(a2[0] > res[k][0] for k in NON_AREBA)
    for k in NON_AREBA:
        margin = a20[0] - res[k][0]
        combined = math.hypot(a20[1], res[k][1])
        assert margin > 2 * combined, f"{k}: margin {margin:.3f} vs 2 SE {2 * combined:.3f}"


# ---------------------------------------------------------------- criterion 7

C7 = "drift: G-mean drops after posterior drift, AREBA_20 ends highest, virtual drift costs <= 0.05"


@pytest.mark.slow
@pytest.mark.criterion(7, C7)
def test_posterior_drift_drop(request):
    drops = {}
    for k in LEARNERS:
        g, _ = sine_run("posterior", k).series("gmean")
        drops[k] = (float(g[ONSET - 1]), float(g[ONSET : ONSET + 500].min()))
    detail(request, "G-mean before onset -> min after: " + ", ".join(f"{k} {a:.3f}->{b:.3f}" for k, (a, b) in drops.items()))
    not_dropping = [k for k, (before, after) in drops.items() if not after < before]
    assert not_dropping == []


@pytest.mark.slow
@pytest.mark.criterion(7, C7)
def test_posterior_drift_final(request):
    res = {k: final_gmean(sine_run("posterior", k)) for k in LEARNERS}
    detail(request, "final: " + fmt(res))
    best = max(res, key=lambda k: res[k][0])
    assert best == "AREBA_20"


@pytest.mark.slow
@pytest.mark.criterion(7, C7)
@pytest.mark.parametrize("scenario", ["prior", "likelihood"])
def test_virtual_drift(request, scenario):
    drifted = final_gmean(sine_run(scenario, "AREBA_20"))[0]
    stationary = final_gmean(sine_run("stationary", "AREBA_20"))[0]
    detail(request, f"{scenario}: AREBA_20 {drifted:.3f} vs stationary {stationary:.3f}")
    assert drifted >= stationary - 0.05


# ---------------------------------------------------------------- criterion 8


def german_csv(tmp_dir: Path) -> Path:
    db = pytest.importorskip("imbalanced_databases")
    raw = Path(db.__file__).parent / "data" / "german" / "german.data-numeric.txt"
    rows = np.loadtxt(raw)
    X, label = rows[:, :-1], rows[:, -1]
    y = (label == 2).astype(int)  # bad credit is the minority, positive class
    path = tmp_dir / "german.csv"
    header = ",".join([f"f{i}" for i in range(X.shape[1])] + ["bad"])
    body = np.column_stack([X, y])
    np.savetxt(path, body, delimiter=",", header=header, comments="", fmt="%g")
    return path


@pytest.mark.slow
@pytest.mark.criterion(8, "credit data R=50: AREBA_20 = 0.6746 ± 0.05, AREBA_20 > AdaptiveCS > Sliding > Baseline")
def test_credit_score(request, tmp_path):
    path = german_csv(tmp_path)
    order = ("AREBA_20", "AdaptiveCS", "Sliding", "Baseline")
    res = {}
    for k in order:
        cfg = ExperimentConfig(csv_path=str(path), label_col="bad", reps=50, seed=MASTER_SEED, **LEARNERS[k])
        res[k] = final_gmean(run_experiment(cfg))
    detail(request, fmt(res))
    assert abs(res["AREBA_20"][0] - 0.6746) <= 0.05
    means = [res[k][0] for k in order]
    assert means == sorted(means, reverse=True) and len(set(means)) == len(means)


# ---------------------------------------------------------------- criterion 9


@pytest.mark.slow
@pytest.mark.criterion(9, "10% label noise with posterior drift: all learners lower, AREBA_20 highest")
def test_label_noise(request):
    noisy = {k: final_gmean(sine_run("posterior_noise", k)) for k in LEARNERS}
    clean = {k: final_gmean(sine_run("posterior", k)) for k in LEARNERS}
    detail(request, "noisy: " + fmt(noisy))
    not_lower = [k for k in LEARNERS if not noisy[k][0] < clean[k][0]]
    assert not_lower == []
    assert max(noisy, key=lambda k: noisy[k][0]) == "AREBA_20"
