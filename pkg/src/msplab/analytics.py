"""Closed-form competitiveness formulas and the optimizers that recover the
best sample sizes.

Poisson probabilities are summed in log space so ranks in the hundreds are
fine.  All scalar formulas accept numpy arrays for ``p``.  A scalar ``p`` to
``c_uniform``/``a_laminar`` goes through a 40-digit evaluation instead, since
at large r their terms cancel down to a few ulps of the result.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import optimize
from scipy.special import gammaln, logsumexp

from .kernels import words as W


class EvaluationError(ValueError):
    """An objective returned a non-finite value."""


def _check_p(p):
    a = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a <= 0.0) or np.any(a >= 1.0):
        raise ValueError("p must lie in (0, 1)")
    return a


def _check_r(r):
    if int(r) != r or r < 1:
        raise ValueError("r must be an integer >= 1")
    return int(r)


def _ret(x, like):
    return float(x) if np.ndim(like) == 0 else x


# -- Poisson helpers ---------------------------------------------------------

def _logpmf(lam, j):
    lam = np.asarray(lam, dtype=float)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        lp = j * np.log(lam) - lam - gammaln(j + 1.0)
    # rate 0: all mass on j = 0
    return np.where(lam == 0.0, np.where(j == 0, 0.0, -np.inf), lp)


def _lower(lam, k):
    """P[P(lam) < k], vectorized over lam."""
    if k <= 0:
        return np.zeros(np.shape(lam))
    j = np.arange(k, dtype=float)
    return np.exp(logsumexp(_logpmf(lam, j), axis=-1))


def _upper(lam, k):
    """P[P(lam) >= k], summed directly over the upper range."""
    if k <= 0:
        return np.ones(np.shape(lam))
    lam_max = float(np.max(lam)) if np.size(lam) else 0.0
    top = int(max(k, lam_max) + 40 + 15 * math.sqrt(lam_max)) + 1
    j = np.arange(k, top + 1, dtype=float)
    return np.exp(logsumexp(_logpmf(lam, j), axis=-1))


def poisson_pmf_cdf(rate: float, k: int) -> tuple[float, float]:
    """(P[X = k], P[X <= k]) for X ~ Poisson(rate)."""
    if rate < 0 or k < 0 or int(k) != k:
        raise ValueError("need rate >= 0 and integer k >= 0")
    k = int(k)
    j = np.arange(k + 1, dtype=float)
    lp = _logpmf(float(rate), j)
    return float(np.exp(lp[-1])), float(np.exp(logsumexp(lp)))


def poisson_tail(rate: float, k: int) -> float:
    """P[X >= k]."""
    if rate < 0 or k < 0:
        raise ValueError("need rate >= 0 and k >= 0")
    return float(_upper(rate, int(k)))


# -- laminar / uniform -------------------------------------------------------

def _mp_terms(r, p):
    p = mpmath.mpf(float(p))
    lnp = mpmath.log(p)
    q = (1 - mpmath.mpf(1) / r) ** r
    return p, lnp, q, -r * lnp, -(r - 1) * lnp


def _mp_lower(lam, k):
    # P[Poisson(lam) < k] is the regularized upper incomplete gamma Q(k, lam)
    return mpmath.gammainc(k, lam, regularized=True)


def _c_precise(r, p):
    with mpmath.workdps(40):
        p, _, q, lam, lam2 = _mp_terms(r, p)
        return float(_mp_lower(lam, r) - p + p / q * (1 - _mp_lower(lam2, r)))


def _a_precise(r, p):
    with mpmath.workdps(40):
        p, lnp, q, lam, lam2 = _mp_terms(r, p)
        pmf = mpmath.exp((r - 1) * mpmath.log(lam) - lam - mpmath.loggamma(r))
        return float(-2 * p + (2 + lnp) * _mp_lower(lam, r - 1) + 2 * pmf
                     + p / q * (1 - _mp_lower(lam2, r)))


def c_uniform(r: int, p):
    """Exact selection probability of greedy on rank-r uniform matroids."""
    r = _check_r(r)
    pa = _check_p(p)
    if r == 1:
        return _ret(-pa * np.log(pa), p)
    if np.ndim(p) == 0:
        return _c_precise(r, pa)
    q = (1.0 - 1.0 / r) ** r
    lam = -r * np.log(pa)
    lam2 = -(r - 1) * np.log(pa)
    val = _lower(lam, r) - pa + pa / q * _upper(lam2, r)
    return _ret(val, p)


def a_laminar(r: int, p):
    """Lower bound for greedy on rank-r laminar matroids."""
    r = _check_r(r)
    pa = _check_p(p)
    if r == 1:
        return _ret(-pa * np.log(pa), p)
    if np.ndim(p) == 0:
        return _a_precise(r, pa)
    q = (1.0 - 1.0 / r) ** r
    lnp = np.log(pa)
    lam = -r * lnp
    lam2 = -(r - 1) * lnp
    pmf = np.exp(_logpmf(lam, np.array([r - 1.0]))[..., 0])
    val = (-2.0 * pa + (2.0 + lnp) * _lower(lam, r - 1) + 2.0 * pmf
           + pa / q * _upper(lam2, r))
    return _ret(val, p)


# -- graphic -----------------------------------------------------------------

def basic_bound(p):
    pa = _check_p(p)
    return _ret(pa * (1.0 - pa), p)


def generation_bound(p):
    pa = _check_p(p)
    return _ret(0.25 * pa * (1.0 - pa ** 2) - 0.5 * pa * np.log(pa), p)


# -- rank-2 mixture ----------------------------------------------------------

def rank2_crossover(p: float, q: float) -> float:
    """The epsilon at which both integrand branches meet at t = q."""
    if q <= p:
        return 0.5
    lg = p * math.log(q / p)
    return lg / (q - p + lg)


def rank2_q_eps(p: float, eps: float) -> float:
    """Root of eps (q - p + p ln(q/p)) = p ln(q/p) on (p, 1], clipped."""
    if eps >= 0.5:
        return p
    if eps <= rank2_crossover(p, 1.0):
        return 1.0
    f = lambda q: rank2_crossover(p, q) - eps  # noqa: E731
    lo = p * (1.0 + 1e-12)
    if not f(lo) > 0.0 > f(1.0):
        raise ArithmeticError("crossover relation is not monotone on this interval")
    return optimize.bisect(f, lo, 1.0, xtol=1e-10)


def _rank2_value(p: float, eps: float, q: float) -> float:
    a2 = p * (2.0 - 2.0 * p + p * math.log(p))
    if q >= 1.0:
        return (1.0 - eps) * a2 - eps * p * math.log(p)
    s = p * p / q
    return ((1.0 - eps) * (a2 + s * (1.0 - q) * (1.0 - math.log(p)) + s * math.log(q))
            + eps * (s * (1.0 - q) + p * math.log(q / p)))


def rank2_mixture_bound(p: float, eps: float) -> float:
    p = float(_check_p(p))
    if not 0.0 <= eps <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    return _rank2_value(p, eps, rank2_q_eps(p, eps))


def rank2_mixture_integral(p: float, eps: float) -> float:
    """Quadrature of the same bound (independent check of the closed form)."""
    from scipy.integrate import quad

    a2 = p * (2.0 - 2.0 * p + p * math.log(p))
    g = lambda t: min(eps * p / t,  # noqa: E731
                      (1 - eps) * (p / t) ** 2 * math.log(t / p) + eps * (p / t) ** 2)
    pts = [rank2_q_eps(p, eps)] if p < rank2_q_eps(p, eps) < 1 else None
    return (1 - eps) * a2 + quad(g, p, 1.0, points=pts, epsabs=1e-13, epsrel=1e-12)[0]


# -- graphic mixture ---------------------------------------------------------

def graphic_R(q: float) -> float:
    a = q - math.log(q) - 1.0
    return a / (a + 1.0 / q)


R_HALF = graphic_R(0.5)


def graphic_q_eps(eps: float) -> float | None:
    """q in [1/2, 1] with R(q) = eps, or None when eps > R(1/2)."""
    if eps > R_HALF:
        return None
    if eps <= 0.0:
        return 1.0
    return optimize.bisect(lambda q: graphic_R(q) - eps, 0.5, 1.0, xtol=1e-10)


def _graphic_value(p: float, eps: float, q: float | None) -> float:
    k2 = lambda x: 1.5 - x - x * x / 2.0 + x * math.log(x)  # noqa: E731
    if q is None or q <= p:
        return p * (1.0 - eps) * k2(p)
    return p * eps * math.log(q / p) + p * (1.0 - eps) * (q - p) + p * (1.0 - eps) * k2(q)


def graphic_mixture_bound(p: float, eps: float) -> float:
    if not 0.5 <= p < 1.0:
        raise ValueError("the graphic mixture bound is only valid for p in [1/2, 1)")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    return _graphic_value(p, eps, graphic_q_eps(eps))


# -- q-forbidden -------------------------------------------------------------

def forbidden_bound(q: int, p):
    if int(q) != q or q < 1:
        raise ValueError("q must be an integer >= 1")
    pa = _check_p(p)
    if q == 1:
        return _ret(-pa * np.log(pa), p)
    return _ret((pa - pa ** q) / (q - 1), p)


def forbidden_optimum(q: int) -> tuple[float, float]:
    return optimize_scalar(lambda x: forbidden_bound(q, x), 1e-9, 1 - 1e-9)


# -- optimizers ----------------------------------------------------------------

def _eval_grid(f, xs):
    try:
        ys = np.asarray(f(xs), dtype=float)
        if ys.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        ys = np.array([float(f(float(x))) for x in xs])
    return ys


def optimize_scalar(f, lo: float, hi: float, tol: float = 1e-10,
                    grid: int = 10_000) -> tuple[float, float]:
    """Grid search then golden-section refinement; returns (argmax, max)."""
    if not lo < hi or tol <= 0:
        raise ValueError("need lo < hi and tol > 0")
    xs = np.linspace(lo, hi, grid)
    ys = _eval_grid(f, xs)
    if not np.all(np.isfinite(ys)):
        bad = xs[~np.isfinite(ys)][0]
        raise EvaluationError(f"objective is not finite at x = {bad:.6g}")
    i = int(np.argmax(ys))          # first index wins ties
    neg = lambda x: -float(f(x))    # noqa: E731
    a, c = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
    if 0 < i < grid - 1 and ys[i] > ys[i - 1] and ys[i] > ys[i + 1]:
        res = optimize.minimize_scalar(neg, bracket=(a, xs[i], c), method="golden",
                                       tol=tol)
    else:
        res = optimize.minimize_scalar(neg, bounds=(a, c), method="bounded",
                                       options={"xatol": tol})
    x = float(res.x)
    y = float(f(x))
    if not math.isfinite(y):
        raise EvaluationError(f"objective is not finite at x = {x:.6g}")
    if y < ys[i]:
        return float(xs[i]), float(ys[i])
    return x, y


def _rank2_pq(p, q):
    return _rank2_value(p, rank2_crossover(p, q), q)


def _graphic_pq(p, q):
    return _graphic_value(p, graphic_R(q), q)


def optimize_mixture(target: str, grid: int = 200) -> dict:
    """Maximize a mixture bound with epsilon pinned to the crossover at q.

    ``rank2`` and ``graphic`` as in the mixture bounds; ``graphic-high-eps`` is the
    supremum over the region eps > R(1/2), where no crossover exists.
    """
    if target == "graphic-high-eps":
        x, v = optimize_scalar(lambda p: _graphic_value(p, R_HALF, None), 0.5, 1 - 1e-9)
        return {"p": x, "q": None, "eps": R_HALF, "value": v}
    if target == "rank2":
        fn, plo = _rank2_pq, 1e-3
    elif target == "graphic":
        fn, plo = _graphic_pq, 0.5
    else:
        raise ValueError(f"unknown target {target!r}")
    best = (-np.inf, 0.0, 0.0)
    ps = np.linspace(plo, 0.999, grid)
    for p in ps:
        qs = np.linspace(p, 1.0, grid)[1:]
        for q in qs:
            v = fn(p, q)
            if v > best[0]:
                best = (v, p, q)

    def obj(x):
        p = min(max(x[0], plo), 0.999)
        q = min(max(x[1], p * (1 + 1e-9)), 1.0)
        return -fn(p, q)

    res = optimize.minimize(obj, [best[1], best[2]], method="Nelder-Mead",
                            options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 4000})
    p = min(max(res.x[0], plo), 0.999)
    q = min(max(res.x[1], p * (1 + 1e-9)), 1.0)
    v = fn(p, q)
    if v < best[0]:
        v, p, q = best
    eps = rank2_crossover(p, q) if target == "rank2" else graphic_R(q)
    return {"p": float(p), "q": float(q), "eps": float(eps), "value": float(v)}


# -- word sampling oracle ----------------------------------------------------

_LANG = {"uniform": W.LANG_UNIFORM, "laminar": W.LANG_LAMINAR, "basic": W.LANG_BASIC,
         "generation": W.LANG_GENERATION, "forbidden": W.LANG_FORBIDDEN}


def language_prob_mc(lang: str, r: int, a: float, b: float, samples: int, seed: int,
                     q: int | None = None) -> tuple[float, float]:
    """Membership frequency of uniform words on [r] with Poisson(r ln(b/a))
    length; returns (frequency, standard error)."""
    if lang not in _LANG:
        raise ValueError(f"unknown language {lang!r}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not 0.0 < a < b <= 1.0:
        raise ValueError("need 0 < a < b <= 1")
    r = _check_r(r)
    q = r if q is None else int(q)
    hit = W.lang_mc(_LANG[lang], r, q, r * math.log(b / a), seed, 0, samples)
    f = hit / samples
    return f, math.sqrt(max(f * (1.0 - f), 0.0) / samples)


# closed form each language sampler reproduces: (language, alphabet size, formula)
LANGUAGE_FORMULAS = {
    "c": ("uniform", None, c_uniform),
    "a": ("laminar", None, a_laminar),
    "basic": ("basic", 2, lambda r, p: basic_bound(p)),
    "generation": ("generation", 3, lambda r, p: generation_bound(p)),
    "forbidden": ("forbidden", None, forbidden_bound),
}
