import math
import time

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from msplab import analytics as an

LN2 = math.log(2)


def _mp_pmf(lam, k):
    with mp.workdps(40):
        lam = mp.mpf(lam)
        return float(mp.e ** (-lam) * lam ** k / mp.factorial(k))


# -- Poisson ---------------------------------------------------------------

def test_poisson_rate_zero():
    assert an.poisson_pmf_cdf(0.0, 0) == (1.0, 1.0)


def test_poisson_normalizes():
    for rate in (0.5, 7.0, 120.0):
        _, cdf = an.poisson_pmf_cdf(rate, int(40 * rate))
        assert abs(cdf - 1.0) < 1e-12


def test_poisson_pmf_matches_high_precision():
    pmf, _ = an.poisson_pmf_cdf(2 * LN2, 1)
    assert abs(pmf - 0.3466) < 1e-4
    assert abs(pmf - _mp_pmf(2 * LN2, 1)) < 1e-12 * pmf
    for rate, k in ((1000.0, 950), (300.0, 10), (3.5, 0)):
        ref = _mp_pmf(rate, k)
        assert abs(an.poisson_pmf_cdf(rate, k)[0] - ref) <= 1e-12 * ref


def test_poisson_rejects_negative():
    with pytest.raises(ValueError):
        an.poisson_pmf_cdf(-1.0, 2)
    with pytest.raises(ValueError):
        an.poisson_pmf_cdf(1.0, -2)


# -- c and a -----------------------------------------------------------------

@pytest.mark.parametrize("r,p,val", [(1, 1 / math.e, 1 / math.e), (2, 0.3824, 0.4273),
                                     (3, 0.3867, 0.4575)])
def test_c_uniform_table(r, p, val):
    assert abs(an.c_uniform(r, p) - val) < 1e-4


@pytest.mark.parametrize("r,p,val", [(2, 0.4241, 0.3341), (4, 0.4629, 0.3169)])
def test_a_laminar_table(r, p, val):
    assert abs(an.a_laminar(r, p) - val) < 1e-4


def test_a_laminar_large_rank_near_limit():
    v = an.a_laminar(200, 0.5)
    assert 1 - LN2 - 0.01 <= v <= 1 - LN2 + 0.02


def test_vector_and_scalar_paths_agree():
    ps = np.linspace(0.05, 0.95, 19)
    for r in (1, 2, 5, 40):
        for f in (an.c_uniform, an.a_laminar):
            vec = f(r, ps)
            assert np.allclose(vec, [f(r, float(p)) for p in ps], atol=1e-12, rtol=0)


def test_domain_errors():
    for bad in (0.0, 1.0, -0.2, float("nan")):
        with pytest.raises(ValueError):
            an.c_uniform(2, bad)
    with pytest.raises(ValueError):
        an.a_laminar(0, 0.5)


def test_a_below_c_on_grid():
    ps = np.linspace(0.01, 0.99, 99)
    for r in range(1, 51):
        assert np.all(an.a_laminar(r, ps) <= an.c_uniform(r, ps) + 1e-12)


def test_a_half_decreases_toward_limit():
    vals = [an.a_laminar(r, 0.5) for r in range(1, 501)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert min(vals) >= 1 - LN2 - 1e-3


def test_c_at_best_p_increases():
    best = [an.optimize_scalar(lambda p: an.c_uniform(r, p), 1e-6, 1 - 1e-6)[1]
            for r in range(1, 16)]
    assert all(b >= a - 1e-12 for a, b in zip(best, best[1:]))
    assert best[-1] < 1 - 1 / math.e


# -- graphic single bounds ----------------------------------------------------

def test_basic_bound():
    assert an.basic_bound(0.5) == 0.25
    assert an.basic_bound(1e-9) < 1e-8
    for p in np.linspace(0.05, 0.95, 10):
        assert abs(an.basic_bound(p) - an.basic_bound(1 - p)) < 1e-15


def test_generation_bound():
    assert abs(an.generation_bound(0.4485) - 0.2693) < 1e-3
    assert an.generation_bound(1 - 1e-9) < 1e-8
    p = 0.5
    # the proof's two terms, added separately
    ref = 0.5 * p * (1 - p * p) + (0.5 * p * math.log(1 / p) - 0.25 * p * (1 - p * p))
    assert abs(an.generation_bound(p) - ref) < 1e-12
    assert abs(an.generation_bound(p) - 0.2670) < 1e-4


# -- mixtures -----------------------------------------------------------------

@pytest.mark.parametrize("p", [0.2, 0.4067, 0.7])
def test_rank2_no_mixing_is_greedy(p):
    assert an.rank2_mixture_bound(p, 0.0) == pytest.approx(an.a_laminar(2, p), abs=1e-12)


def test_rank2_optimum_value():
    assert abs(an.rank2_mixture_bound(0.4067, 0.3928) - 0.3462) < 1e-3


@pytest.mark.parametrize("p", [0.1, 0.3, 0.6])
def test_rank2_all_partition(p):
    ref, _ = integrate.quad(lambda t: min(p / t, (p / t) ** 2), p, 1)
    assert an.rank2_mixture_bound(p, 1.0) == pytest.approx(ref, abs=1e-9)
    assert ref == pytest.approx(p * (1 - p), abs=1e-12)


def test_rank2_bound_matches_integral():
    for p in (0.3, 0.45):
        for eps in (0.1, 0.4, 0.8):
            assert an.rank2_mixture_bound(p, eps) == pytest.approx(
                an.rank2_mixture_integral(p, eps), abs=1e-8)


def test_rank2_keeps_greedy_term():
    for p in np.linspace(0.05, 0.95, 19):
        for eps in np.linspace(0, 1, 11):
            assert an.rank2_mixture_bound(p, eps) >= an.a_laminar(2, p) * (1 - eps) - 1e-12


def test_graphic_mixture_values():
    assert an.graphic_mixture_bound(0.5, 0.0141) >= 0.2504 - 1e-3
    assert an.graphic_mixture_bound(0.5, 0.0) == pytest.approx(0.25, abs=1e-12)
    assert an.graphic_mixture_bound(0.7, 1.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        an.graphic_mixture_bound(0.4, 0.1)


def test_R_at_half():
    assert an.R_HALF == pytest.approx(0.0880685, abs=1e-7)


# -- forbidden ---------------------------------------------------------------

def test_forbidden_q1():
    x, v = an.forbidden_optimum(1)
    assert x == pytest.approx(1 / math.e, abs=1e-6) and v == pytest.approx(1 / math.e, abs=1e-9)


def test_forbidden_q2():
    x, v = an.forbidden_optimum(2)
    assert x == pytest.approx(0.5, abs=1e-6) and v == pytest.approx(0.25, abs=1e-6)


def test_forbidden_q3():
    x, v = an.forbidden_optimum(3)
    assert x == pytest.approx(0.5774, abs=1e-4) and v == pytest.approx(0.1925, abs=1e-4)
    assert v == pytest.approx(3 ** -1.5, abs=1e-9)


def test_forbidden_optimum_exponent():
    # maximizer of (p - p^q)/(q - 1) is q^(-1/(q-1))
    for q in range(2, 8):
        x, _ = an.forbidden_optimum(q)
        assert x == pytest.approx(q ** (-1 / (q - 1)), abs=1e-6)


# -- optimizers ----------------------------------------------------------------

def test_optimize_scalar_examples():
    x, _ = an.optimize_scalar(lambda p: an.c_uniform(2, p), 1e-6, 1 - 1e-6)
    assert abs(x - 0.3824) < 1e-3
    x, v = an.optimize_scalar(lambda p: an.a_laminar(3, p), 1e-6, 1 - 1e-6)
    assert abs(x - 0.4490) < 1e-3 and abs(v - 0.3225) < 1e-4
    x, _ = an.optimize_scalar(lambda x: -(x - 0.3) ** 2, 0, 1, tol=1e-10)
    assert abs(x - 0.3) < 1e-8


def test_optimize_scalar_edges_and_errors():
    x, _ = an.optimize_scalar(lambda x: x, 0, 1)
    assert x == pytest.approx(1.0)
    with pytest.raises(an.EvaluationError):
        an.optimize_scalar(lambda x: np.nan * x, 0, 1)
    with pytest.raises(ValueError):
        an.optimize_scalar(lambda x: x, 1, 0)


def test_optimize_scalar_is_deterministic():
    f = lambda p: an.a_laminar(4, p)  # noqa: E731
    assert an.optimize_scalar(f, 1e-6, 1 - 1e-6) == an.optimize_scalar(f, 1e-6, 1 - 1e-6)


def test_optimize_rank2():
    t = time.time()
    res = an.optimize_mixture("rank2")
    assert time.time() - t < 30
    assert abs(res["p"] - 0.4067) < 2e-3 and abs(res["q"] - 0.9194) < 2e-3
    assert abs(res["eps"] - 0.3928) < 2e-3 and abs(res["value"] - 0.3462) < 2e-3


def test_optimize_graphic():
    res = an.optimize_mixture("graphic")
    assert abs(res["p"] - 0.5) < 1e-3 and abs(res["q"] - 0.8251) < 2e-3
    assert abs(res["eps"] - 0.0141) < 3e-3 and abs(res["value"] - 0.2504) < 1.5e-3


def test_optimize_graphic_high_eps():
    res = an.optimize_mixture("graphic-high-eps")
    assert res["p"] == pytest.approx(0.5, abs=1e-6)
    assert res["value"] == pytest.approx(0.2409, abs=1e-4)


# -- word sampling --------------------------------------------------------------

@pytest.mark.parametrize("lang,r,p,val", [("uniform", 2, 0.3824, 0.4273),
                                          ("laminar", 2, 0.4241, 0.3341),
                                          ("basic", 2, 0.5, 0.25)])
def test_language_mc_examples(lang, r, p, val):
    f, se = an.language_prob_mc(lang, r, p, 1.0, 1_000_000, 3)
    assert abs(f - val) < 3 * se + 1e-4


def test_language_mc_errors():
    with pytest.raises(ValueError):
        an.language_prob_mc("uniform", 2, 0.5, 1.0, 0, 1)
    with pytest.raises(ValueError):
        an.language_prob_mc("uniform", 2, 0.0, 1.0, 10, 1)


def test_closed_forms_match_sampling_grid():
    for r in (1, 2, 3, 5, 8):
        for p in (0.2, 0.35, 0.5, 0.65, 0.8):
            for name in ("c", "a"):
                lang, _, f = an.LANGUAGE_FORMULAS[name]
                freq, se = an.language_prob_mc(lang, r, p, 1.0, 1_000_000, 100 * r + int(100 * p))
                assert abs(freq - f(r, p)) < 4 * se, (name, r, p)
