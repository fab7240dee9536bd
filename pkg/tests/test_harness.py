import csv
import io
import math

import numpy as np
import pytest
from scipy import stats

from msplab.algorithms import RunConfig, run
from msplab.arrivals import ArrivalSample, AugmentedInstance, trial_sample
from msplab.generators import random_graph, random_laminar, random_rank2, tight_laminar
from msplab.harness import (CompetitivenessReport, compare_modes, distribution_tests, estimate, exact_oracle,
                            interval_samples, poisson_chisquare, wilson)
from msplab.matroids import MatroidInstance


def test_single_trial_single_element():
    inst = MatroidInstance.uniform(1, 1)
    rep = estimate(inst, "greedy", RunConfig(1e-6), 1, 0, mode="none")
    assert rep.min_frequency == 1.0


def test_rank_one_secretary():
    rep = estimate(MatroidInstance.uniform(300, 1), "greedy", RunConfig(1 / math.e), 200_000, 5)
    assert abs(rep.min_frequency - 0.3678) < 0.01


def test_tight_laminar_rank_two():
    rep = estimate(tight_laminar(50, 2, 3), "greedy", RunConfig(0.4241), 200_000, 6)
    assert 0.3341 - 0.01 <= rep.min_frequency <= 0.3341 + 0.02


def test_report_is_seed_deterministic_and_thread_independent():
    inst = random_laminar(12, 2, 2, 1)
    a = estimate(inst, "greedy", RunConfig(0.4), 40_000, 77, threads=1)
    b = estimate(inst, "greedy", RunConfig(0.4), 40_000, 77, threads=3)
    assert a.to_json() == b.to_json()
    c = estimate(inst, "greedy", RunConfig(0.4), 40_000, 78)
    assert c.to_json() != a.to_json()


def test_report_fields_and_csv():
    inst = MatroidInstance.uniform(5, 2)
    rep = estimate(inst, "greedy", RunConfig(0.4), 5000, 1)
    for e, s in rep.per_element.items():
        assert s.hits <= s.trials and s.ci_lo <= s.freq <= s.ci_hi
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["element_id", "hits", "trials", "freq", "ci_lo", "ci_hi"]
    assert {int(r[0]) for r in rows[1:]} == set(inst.opt)
    d = rep.to_dict()
    assert {"seed", "trials", "mode", "algorithm", "p", "epsilon"} <= set(d)


def test_wilson_interval_small_counts():
    lo, hi = wilson(0, 10)
    assert lo == 0.0 and 0.2 < hi < 0.35


def test_estimate_input_errors():
    with pytest.raises(ValueError):
        estimate(MatroidInstance.uniform(3, 1), "basic", RunConfig(0.5), 10, 0)
    with pytest.raises(ValueError):
        estimate(MatroidInstance.uniform(3, 1), "greedy", RunConfig(0.5), 0, 0)


def test_compare_modes_reports_both():
    out = compare_modes(random_rank2([2, 2, 2], 3), "oblivious-partition", RunConfig(0.4),
                        2000, 1)
    assert set(out) == {"laminar-copies", "none"}
    assert isinstance(out["laminar-copies"], CompetitivenessReport)
    # without dummies the sample can have rank < 2, which the partition algorithm refuses
    assert isinstance(out["none"], (CompetitivenessReport, str))


# -- exact oracle ---------------------------------------------------------------

def test_oracle_two_element_secretary():
    inst = MatroidInstance.uniform(2, 1, [0, 1])
    res = exact_oracle(inst, "greedy", RunConfig(0.5), mode="none")
    assert res.per_element[0] == pytest.approx(0.375, abs=1e-12)
    p = 0.5
    assert res.per_element[0] == pytest.approx((1 - p) - (1 - p) ** 2 / 2, abs=1e-12)
    assert res.total_weight == pytest.approx(1.0, abs=1e-12)


def test_oracle_late_sample_selects_nothing():
    inst = MatroidInstance.uniform(4, 2)
    res = exact_oracle(inst, "greedy", RunConfig(1 - 1e-9))
    assert max(res.per_element.values()) < 1e-6


def test_oracle_agrees_with_estimate():
    inst = MatroidInstance.uniform(6, 2)
    cfg = RunConfig(0.5)
    ex = exact_oracle(inst, "greedy", cfg)
    mc = estimate(inst, "greedy", cfg, 1_000_000, 12, mode="pinned")
    for e, v in ex.per_element.items():
        se = math.sqrt(v * (1 - v) / 1_000_000)
        assert abs(mc.per_element[e].freq - v) < 4 * se


def test_oracle_refusals():
    with pytest.raises(ValueError):
        exact_oracle(MatroidInstance.uniform(9, 2), "greedy", RunConfig(0.5))
    with pytest.raises(ValueError):
        exact_oracle(MatroidInstance.uniform(5, 2), "greedy", RunConfig(0.5), mode="auto")


def test_oracle_mixture_weights_branches():
    inst = random_rank2([2, 2], 4)
    cfg = RunConfig(0.4, 0.3)
    mix = exact_oracle(inst, "mixture-rank2", cfg)
    g = exact_oracle(inst, "greedy", cfg)
    o = exact_oracle(inst, "oblivious-partition", cfg)
    for e in inst.opt:
        assert mix.per_element[e] == pytest.approx(0.7 * g.per_element[e] + 0.3 * o.per_element[e],
                                                   abs=1e-12)


@pytest.mark.parametrize("inst,algo", [
    (random_laminar(10, 2, 2, 3), "greedy"),
    (random_rank2([2, 3, 1], 2), "oblivious-partition"),
    (random_graph(5, 8, False, 0.3, 1), "generation"),
    (random_graph(5, 8, False, 0.3, 1), "oblivious-graphic"),
])
def test_outcomes_depend_only_on_order_and_cut(inst, algo):
    p = 0.45
    rng = np.random.default_rng(0)
    for trial in range(200):
        aug, sample, coin = trial_sample(inst, p, 4, trial)
        ref = run(algo, aug, sample, RunConfig(p, 0.0, coin)).selected

        # random increasing map of [0,1] that fixes p
        knots_lo = np.sort(rng.random(5)) * p
        knots_hi = p + np.sort(rng.random(5)) * (1 - p)
        xs = np.concatenate([[0], np.linspace(0, p, 7)[1:-1], [p], np.linspace(p, 1, 7)[1:-1], [1]])
        ys = np.concatenate([[0], np.sort(knots_lo), [p], np.sort(knots_hi), [1]])
        warp = lambda t: np.where(t < 0, t, np.interp(t, xs, ys))  # noqa: E731
        times = warp(sample.times)
        if len(np.unique(times)) < len(times):
            continue
        dummies = tuple(type(d)(d.id, d.target, d.copy, d.rank, float(warp(np.array(d.time))))
                        for d in aug.dummies)
        aug2 = AugmentedInstance(aug.base, aug.mode, aug.p, dummies)
        assert run(algo, aug2, ArrivalSample(times), RunConfig(p, 0.0, coin)).selected == ref


# -- Poisson structure -------------------------------------------------------

def test_chisquare_merges_sparse_bins():
    rng = np.random.default_rng(0)
    counts = rng.poisson(2.0, 5000)
    stat, pv, bins = poisson_chisquare(counts, 2.0)
    assert bins < counts.max() + 1 and pv > 0.001


def test_distribution_tests_examples():
    inst = MatroidInstance.uniform(8, 3)
    res = distribution_tests(inst, 0.1, 100_000, 3)
    assert res["ks"]["pvalue"] > 0.01
    half = next(c for c in res["chi2"] if (c["a"], c["b"]) == (0.5, 1.0))
    assert half["rate"] == pytest.approx(3 * math.log(2))
    assert half["pvalue"] > 0.01
    assert abs(res["independence"]["pearson_r"]) < 3 / math.sqrt(100_000)
    assert res["passed"]


def test_distribution_tests_interval_guard():
    with pytest.raises(ValueError):
        distribution_tests(MatroidInstance.uniform(4, 2), 0.3, 100, 0)


def test_last_improving_time_cdf_other_b():
    # S(b) for b < 1 follows (x/b)^r as well
    inst = tight_laminar(2, 3, 1)
    s, _ = interval_samples(inst, 0.1, 50_000, 5, bs=(0.6,))
    x = s[:, 0]
    x = x[~np.isnan(x)]
    assert stats.kstest(x, lambda v: np.clip(v / 0.6, 0, 1) ** 3).pvalue > 0.01
