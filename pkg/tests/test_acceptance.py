"""Acceptance criteria 1-10.

Each test carries ``@pytest.mark.criterion(n)``; the conftest prints one
PASS/FAIL line per criterion with the measured quantities after the run.
Monte-Carlo criteria use fixed master seeds, so the numbers are reproducible.
"""

import json
import time

import numpy as np
import pytest

from colp import cli
from colp.causal import Y_TO_X, X_TO_Y, TIE, decide, joint_table, saturated_log_likelihood
from colp.classifier import complexity, fit_colp_exhaustive, fit_colp_greedy
from colp.experiments import RunSettings, run_ablation, run_simulation
from colp.links import LOGIT, PROBIT
from colp.ordinal import OrdinalParams, _TableProblem, fit_ordinal, nll_gradient, ordered_table, pmf_table
from colp.permutations import Permutation, enumerate_all
from colp.sample import PairedSample
from colp.synth import ScenarioConfig, generate_replication

SEED = 7


@pytest.mark.criterion(1)
def test_gradient_correctness(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        L, S = (int(v) for v in rng.integers(3, 9, size=2))
        params = OrdinalParams(rng.normal(0, 1.5, S), np.cumsum(rng.uniform(0.1, 1.5, L - 2)))
        sigma = Permutation(tuple(int(v) for v in rng.permutation(L) + 1))
        link = LOGIT if rng.random() < 0.5 else PROBIT
        data = PairedSample(rng.integers(1, S + 1, 200), rng.integers(1, L + 1, 200), S, L)
        grad = nll_gradient(params, sigma, link, data)
        problem = _TableProblem(ordered_table(data, sigma), link, freeze_unobserved=False)
        theta = problem.pack(params)
        fd = np.empty_like(theta)
        for i in range(theta.size):
            e = np.zeros_like(theta)
            e[i] = 1e-5
            fd[i] = (problem.value(theta + e) - problem.value(theta - e)) / 2e-5
        worst = max(worst, float(np.max(np.abs(grad - fd)) / np.max(np.abs(fd))))
    elapsed = time.perf_counter() - start
    criterion(f"max relative error {worst:.2e} over 100 configurations ({elapsed:.1f} s)")
    assert worst <= 1e-6
    assert elapsed < 60


@pytest.mark.criterion(2)
def test_exhaustive_oracle_equivalence(criterion):
    start = time.perf_counter()
    matches = 0
    for rep in range(50):
        data, _ = generate_replication(ScenarioConfig("s1", L=4, S=4, n=300, seed=SEED), rep)
        fit = fit_colp_exhaustive(data, LOGIT, full_enumeration=True)
        naive = max(fit_ordinal(data, sigma, LOGIT).log_likelihood for sigma in enumerate_all(4))
        matches += fit.log_likelihood == naive
    elapsed = time.perf_counter() - start
    criterion(f"exact match on {matches}/50 datasets ({elapsed:.1f} s)")
    assert matches == 50
    assert elapsed < 120


@pytest.mark.criterion(3)
def test_greedy_reaches_exhaustive_optimum(criterion):
    start = time.perf_counter()
    hits = 0
    for rep in range(200):
        data, _ = generate_replication(ScenarioConfig("s1", L=4, S=4, n=500, seed=SEED), rep)
        greedy = fit_colp_greedy(data, LOGIT)
        exhaustive = fit_colp_exhaustive(data, LOGIT)
        hits += abs(greedy.log_likelihood - exhaustive.log_likelihood) <= 1e-6
    elapsed = time.perf_counter() - start
    criterion(f"greedy optimal in {hits}/200 = {hits / 200:.3f} (need >= 0.95, {elapsed:.1f} s)")
    assert hits / 200 >= 0.95
    assert elapsed < 300


@pytest.mark.criterion(4)
def test_scenario_one_accuracy(criterion):
    start = time.perf_counter()
    _, summary = run_simulation(ScenarioConfig("s1", n=1000, reps=200, seed=SEED))
    elapsed = time.perf_counter() - start
    criterion(
        f"accuracy {summary['accuracy']:.3f} +/- {summary['accuracy_se']:.3f}, "
        f"mean tau {summary['mean_tau']:.3f} (need >= 0.85 each, {elapsed:.0f} s)"
    )
    assert summary["accuracy"] >= 0.85
    assert summary["mean_tau"] >= 0.85
    assert elapsed < 600


@pytest.mark.criterion(5)
def test_sample_size_trend(criterion):
    start = time.perf_counter()
    base = ScenarioConfig("s1", reps=200, seed=SEED)
    _, small = run_simulation(base.with_(n=100))
    _, large = run_simulation(base.with_(n=1000))
    rows, big = run_simulation(base.with_(n=5000, reps=50))
    elapsed = time.perf_counter() - start
    criterion(
        f"accuracy n=100 {small['accuracy']:.3f} < n=1000 {large['accuracy']:.3f}; "
        f"mean gap/n at n=5000 {big['mean_gap_per_obs']:.4f} ({elapsed:.0f} s)"
    )
    assert large["accuracy"] > small["accuracy"]
    assert big["mean_gap_per_obs"] > 0
    assert elapsed < 600


@pytest.mark.criterion(6)
def test_ablation(criterion):
    start = time.perf_counter()
    _, table = run_ablation(ScenarioConfig("s1", n=1000, reps=200, seed=SEED), [0.0, 1.0], RunSettings())
    acc = {row["target_tau"]: row["accuracy"] for row in table}
    elapsed = time.perf_counter() - start
    criterion(f"accuracy tau=1 {acc[1.0]:.3f}, tau=0 {acc[0.0]:.3f}, difference {acc[1.0] - acc[0.0]:.3f} ({elapsed:.0f} s)")
    assert acc[1.0] - acc[0.0] >= 0.5
    assert elapsed < 600


@pytest.mark.criterion(7)
def test_hidden_confounder(criterion):
    start = time.perf_counter()
    _, summary = run_simulation(ScenarioConfig("s3", n=1000, reps=200, seed=SEED))
    elapsed = time.perf_counter() - start
    criterion(f"accuracy {summary['accuracy']:.3f} +/- {summary['accuracy_se']:.3f} (need >= 0.75, {elapsed:.0f} s)")
    assert summary["accuracy"] >= 0.75
    assert elapsed < 600


@pytest.mark.criterion(8)
def test_complexity_formulas(criterion):
    start = time.perf_counter()
    bad = []
    for L in range(3, 13):
        for S in range(3, 13):
            r = complexity(L, S)
            expected = ((L - 1) * S, 2 * L + S - 4, 2 * L + 2 * S - 5, S * L - 1)
            if (r.multinomial, r.colp, r.causal_colp, r.saturated) != expected:
                bad.append((L, S))
            if not (r.colp < r.multinomial and r.causal_colp < r.saturated):
                bad.append((L, S))
    elapsed = time.perf_counter() - start
    criterion(f"{100 - len(bad)}/100 grid points correct ({elapsed * 1e3:.1f} ms)")
    assert not bad
    assert elapsed < 1


@pytest.mark.criterion(9)
def test_pmf_normalization(criterion):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(300):
        L, S = (int(v) for v in rng.integers(2, 11, size=2))
        params = OrdinalParams(rng.normal(0, 5, S), np.cumsum(rng.uniform(1e-3, 5, L - 2)))
        sigma = Permutation(tuple(int(v) for v in rng.permutation(L) + 1))
        for link in (LOGIT, PROBIT):
            worst = max(worst, float(np.max(np.abs(pmf_table(params, sigma, link).sum(axis=1) - 1.0))))
    criterion(f"pmf normalization error {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.criterion(9)
def test_verdict_invariants(criterion):
    worst_tel = 0.0
    swaps = sat = 0
    for rep in range(20):
        data, _ = generate_replication(ScenarioConfig("s1", n=500, seed=SEED), rep)
        verdict = decide(data)
        back = joint_table(verdict.backward)
        worst_tel = max(worst_tel, float(np.max(np.abs(back.sum(axis=0) - verdict.backward.marginal_probs))))
        flipped = decide(data.swapped())
        flip = {X_TO_Y: Y_TO_X, Y_TO_X: X_TO_Y, TIE: TIE}
        swaps += flipped.log_likelihood_gap == -verdict.log_likelihood_gap and flipped.decision == flip[verdict.decision]
        ceiling = saturated_log_likelihood(data)
        sat += verdict.forward.joint_log_likelihood <= ceiling and verdict.backward.joint_log_likelihood <= ceiling
    criterion(f"telescoping error {worst_tel:.1e}; antisymmetry {swaps}/20; saturated dominance {sat}/20")
    assert worst_tel <= 1e-12
    assert swaps == 20
    assert sat == 20


@pytest.mark.criterion(9)
def test_run_record_determinism(criterion, tmp_path):
    def body(path):
        with open(path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if '"record": "timing"' not in line]

    args = ["simulate", "--n", "300", "--reps", "6", "--seed", str(SEED)]
    paths = [tmp_path / f"{i}.jsonl" for i in range(3)]
    for path, jobs in zip(paths, ("1", "1", "3")):
        assert cli.main(args + ["--jobs", jobs, "--out", str(path)]) == 0
    first, second, parallel = (body(p) for p in paths)
    same = first == second
    results = lambda recs: [r for r in recs if r["record"] != "run"]  # noqa: E731
    jobs_free = results(first) == results(parallel)
    criterion(f"identical reruns {same}; --jobs independent {jobs_free}")
    assert same and jobs_free


@pytest.mark.criterion(10)
def test_bench_collection(criterion, tmp_path):
    out = tmp_path / "bench.jsonl"
    assert cli.main(["bench", "--out", str(out)]) == 0
    with open(out, encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh]
    summary = next(r for r in records if r["record"] == "summary")
    criterion(f"bench accuracy {summary['accuracy']:.3f} over {summary['pairs']} pairs")
    assert summary["pairs"] == 6
    assert summary["accuracy"] == 1.0
