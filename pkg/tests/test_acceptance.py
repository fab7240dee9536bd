"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a PASS/FAIL line through the ``acceptance`` fixture; the
lines are repeated in the terminal summary.  Seeds are fixed up front.
"""
import math
import time

import numpy as np
import pytest

from msplab import analytics as an
from msplab.algorithms import RunConfig
from msplab.generators import (random_graph, random_laminar, random_rank2, tight_laminar,
                               uniform_instance)
from msplab.harness import distribution_tests, estimate, exact_oracle
from msplab.labeling import good_word_fraction, verify_implication

# tabulated (p(r), value), r = 1..4
UNIFORM_TABLE = {1: (1 / math.e, 1 / math.e), 2: (0.3824, 0.4273),
                 3: (0.3867, 0.4575), 4: (0.3883, 0.4769)}
LAMINAR_TABLE = {1: (1 / math.e, 1 / math.e), 2: (0.4241, 0.3341),
                 3: (0.4490, 0.3225), 4: (0.4629, 0.3169)}

pytestmark = pytest.mark.slow


def test_criterion_1_table_cells(acceptance):
    t0 = time.perf_counter()
    bad = []
    for table, f in ((UNIFORM_TABLE, an.c_uniform), (LAMINAR_TABLE, an.a_laminar)):
        for r, (p_ref, v_ref) in table.items():
            x, v = an.optimize_scalar(lambda p: f(r, p), 1e-6, 1 - 1e-6)
            if abs(x - p_ref) > 1e-3 or abs(v - v_ref) > 1e-4:
                bad.append((f.__name__, r, round(x, 5), round(v, 5)))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 1.0
    acceptance(1, ok, f"8 cells, {len(bad)} off, {dt:.2f}s {bad or ''}")
    assert ok


def test_criterion_2_limits(acceptance):
    t0 = time.perf_counter()
    a = float(an.a_laminar(500, 0.5))
    c = float(an.c_uniform(500, 1 / math.e))
    dt = time.perf_counter() - t0
    lo_a = 1 - math.log(2)
    lo_c = 1 - 1 / math.e
    ok_a = lo_a <= a <= lo_a + 0.01
    ok_c = lo_c - 0.01 <= c <= lo_c
    ok = ok_a and ok_c and dt < 1.0
    acceptance(2, ok, f"a(500,.5)={a:.6f} in [{lo_a:.6f},{lo_a + .01:.6f}]: {ok_a}; "
                      f"c(500,1/e)={c:.6f} in [{lo_c - .01:.6f},{lo_c:.6f}]: {ok_c}; {dt:.2f}s")
    assert ok


def test_criterion_3_mixture_optimizers(acceptance):
    t0 = time.perf_counter()
    r2 = an.optimize_mixture("rank2")
    t_r2 = time.perf_counter() - t0
    t0 = time.perf_counter()
    gr = an.optimize_mixture("graphic")
    t_gr = time.perf_counter() - t0
    want = {"p": (0.4067, 2e-3), "q": (0.9194, 2e-3), "eps": (0.3928, 3e-3),
            "value": (0.3462, 1e-3)}
    ok_r2 = all(abs(r2[k] - v) <= tol for k, (v, tol) in want.items()) and t_r2 < 30
    ok_gr = gr["value"] >= 0.2504 - 1.5e-3 and abs(gr["p"] - 0.5) <= 1e-3 and t_gr < 30
    ok = ok_r2 and ok_gr
    acceptance(3, ok, "rank2 (p,q,eps,v)=({p:.4f},{q:.4f},{eps:.4f},{value:.4f}) ".format(**r2)
               + f"{t_r2:.1f}s; graphic p={gr['p']:.4f} v={gr['value']:.4f} {t_gr:.1f}s")
    assert ok


def test_criterion_4_monte_carlo_vs_tables(acceptance):
    trials = 200_000
    cells = []
    for r in (1, 2, 3):
        p, v = UNIFORM_TABLE[r]
        t0 = time.perf_counter()
        rep = estimate(uniform_instance(500, r), "greedy", RunConfig(p), trials, 40 + r)
        dt = time.perf_counter() - t0
        m = rep.min_frequency
        cells.append((f"uniform r={r}", m, abs(m - v) <= 0.01 and dt < 60, dt))
    for r in (1, 2, 3, 4):
        p, _ = LAMINAR_TABLE[r]
        a = float(an.a_laminar(r, p))
        t0 = time.perf_counter()
        rep = estimate(tight_laminar(50, r, 50 + r), "greedy", RunConfig(p), trials, 60 + r)
        dt = time.perf_counter() - t0
        m = rep.min_frequency
        cells.append((f"tight r={r}", m, a - 0.01 <= m <= a + 0.02 and dt < 60, dt))
    ok = all(c[2] for c in cells)
    acceptance(4, ok, "; ".join(f"{n} {m:.4f}{'' if g else ' X'} {dt:.0f}s"
                                for n, m, g, dt in cells))
    assert ok


def _multigraphs(bias, count, seed0):
    out = []
    for i in range(count):
        v = 6 + i % 5
        out.append(random_graph(v, 2 * v + i % 3, False, bias, seed0 + i))
    return out


def _simple_graphs(count, seed0):
    out = []
    for i in range(count):
        v = 6 + i % 5
        out.append(random_graph(v, min(2 * v, v * (v - 1) // 2), True, 0.0, seed0 + i))
    return out


def test_criterion_5_graphic_bounds(acceptance):
    trials = 200_000
    t0 = time.perf_counter()
    groups = [
        ("basic", RunConfig(0.5), _multigraphs(0.3, 10, 500), 0.24),
        ("generation", RunConfig(0.4485), _simple_graphs(10, 600), 0.2693 - 0.015),
        ("mixture-graphic", RunConfig(0.5, epsilon=0.0141), _multigraphs(0.9, 10, 700),
         0.2504 - 0.015),
    ]
    parts, ok = [], True
    for k, (algo, cfg, insts, floor) in enumerate(groups):
        mins = [estimate(g, algo, cfg, trials, 1000 * k + j).min_frequency
                for j, g in enumerate(insts)]
        worst = min(mins)
        ok &= worst >= floor
        parts.append(f"{algo} min {worst:.4f} (>= {floor:.4f})")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    acceptance(5, ok, "; ".join(parts) + f"; {dt:.0f}s")
    assert ok


def test_criterion_6_language_implications(acceptance):
    trials = 100_000
    families = [
        ("greedy", "induced", "uniform",
         [uniform_instance(n, r) for n, r in ((6, 1), (8, 2), (10, 3), (12, 4), (20, 5))]),
        ("greedy", "chain", "laminar", [random_laminar(12 + 2 * i, 3, 3, 70 + i) for i in range(5)]),
        ("basic", "lambda0", "basic", _multigraphs(0.4, 5, 80)),
        ("generation", "lambda1", "generation", _simple_graphs(5, 90)),
    ]
    parts, ok = [], True
    for algo, scheme, lang, insts in families:
        viol = conv = mism = 0
        for j, inst in enumerate(insts):
            res = verify_implication(inst, algo, scheme, lang, None, trials, 300 + j, 0.4)
            viol += res["violations"]
            mism += res.get("first_one_mismatch", 0)
            if lang == "uniform":
                conv += res["converse_violations"]
        ok &= viol == 0 and conv == 0 and mism == 0
        parts.append(f"{lang}: viol={viol} conv={conv if lang == 'uniform' else '-'} mism={mism}")
    acceptance(6, ok, "; ".join(parts))
    assert ok


def test_criterion_7_poisson_structure(acceptance):
    insts = [("uniform", uniform_instance(30, 3)),
             ("laminar", random_laminar(30, 3, 3, 11)),
             ("graphic", random_graph(8, 16, False, 0.3, 12))]
    parts, ok = [], True
    for name, inst in insts:
        res = distribution_tests(inst, 0.1, 100_000, 2026)
        pv = [res["ks"]["pvalue"]] + [c["pvalue"] for c in res["chi2"]]
        ok &= bool(res["passed"]) and min(pv) > 0.01
        parts.append(f"{name} min p={min(pv):.3f}")
    acceptance(7, ok, "; ".join(parts))
    assert ok


def _oracle_instances(algo, seed0):
    rng = np.random.default_rng(seed0)
    out = []
    for _ in range(20):
        if algo == "greedy":
            n = int(rng.integers(4, 9))
            out.append(random_laminar(n, int(rng.integers(1, 4)), 2, rng))
        elif algo == "oblivious-partition":
            k = int(rng.integers(2, 5))
            sizes = rng.integers(1, 4, size=k)
            while sizes.sum() > 8:
                sizes[np.argmax(sizes)] -= 1
            out.append(random_rank2([int(s) for s in sizes], rng))
        else:
            v = int(rng.integers(3, 6))
            out.append(random_graph(v, int(rng.integers(v, 9)), False, 0.4, rng))
    return out


def test_criterion_8_oracle_equivalence(acceptance):
    worst, checked, ok = 0.0, 0, True
    for k, algo in enumerate(("greedy", "oblivious-partition", "basic")):
        for j, inst in enumerate(_oracle_instances(algo, 800 + k)):
            assert inst.n <= 8
            cfg = RunConfig((0.3, 0.45, 0.6)[j % 3])
            ex = exact_oracle(inst, algo, cfg)
            mc = estimate(inst, algo, cfg, 1_000_000, 9000 + 100 * k + j, mode="pinned")
            for e, pe in ex.per_element.items():
                sd = math.sqrt(max(pe * (1 - pe), 1e-12) / 1_000_000)
                z = abs(mc.per_element[e].freq - pe) / sd
                worst = max(worst, z)
                checked += 1
                ok &= z <= 4
    words = []
    for m, r in ((1, 3), (2, 3), (3, 5)):
        f, _ = good_word_fraction(m, r, 1_000_000, 17 * r + m)
        f0 = 1 - m / r
        z = abs(f - f0) / math.sqrt(f0 * (1 - f0) / 1_000_000)
        ok &= z <= 3
        words.append(f"({m},{r}) {f:.4f} z={z:.2f}")
    acceptance(8, ok, f"{checked} element checks, max z={worst:.2f}; good words " + ", ".join(words))
    assert ok


def test_criterion_9_closed_forms_vs_words(acceptance):
    grid = (0.2, 0.35, 0.5, 0.65, 0.8)
    cases = [("c", r, None) for r in (1, 2, 3, 4)] + [("a", r, None) for r in (1, 2, 3, 4)]
    cases += [("basic", 2, None), ("generation", 3, None)]
    cases += [("forbidden", q, q) for q in (1, 2, 3)]
    worst, n, ok = 0.0, 0, True
    for i, (name, r, q) in enumerate(cases):
        lang, _, f = an.LANGUAGE_FORMULAS[name]
        for j, p in enumerate(grid):
            exact = float(f(q, p)) if name == "forbidden" else float(f(r, p))
            freq, _ = an.language_prob_mc(lang, r, p, 1.0, 1_000_000, 50 * i + j, q=q)
            sd = math.sqrt(max(exact * (1 - exact), 1e-12) / 1_000_000)
            z = abs(freq - exact) / sd
            worst = max(worst, z)
            n += 1
            ok &= z <= 4
    acceptance(9, ok, f"{n} (formula, p) points, max z={worst:.2f}")
    assert ok
