"""Monte Carlo estimation, the exact enumeration oracle and the Poisson
structure tests.

Trials are cut into fixed chunks; each trial draws from its own counter
stream ``(seed, trial)`` so the result does not depend on how the chunks are
scheduled over threads.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .algorithms import ALGO_CODE, MIXTURES, RunConfig, check_compatible
from .arrivals import code_for, resolve_mode
from .kernels import drivers as D
from .matroids import MatroidInstance

CHUNK = 16_384
MAX_ORACLE_N = 8


def default_threads() -> int:
    env = os.environ.get("MSP_THREADS")
    if env:
        return max(1, int(env))
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity")
               else os.cpu_count() or 1)


def wilson(hits: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    ci = stats.binomtest(int(hits), int(trials)).proportion_ci(confidence_level=level,
                                                               method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class ElementStat:
    hits: int
    trials: int
    freq: float
    ci_lo: float
    ci_hi: float


@dataclass
class CompetitivenessReport:
    algorithm: str
    p: float
    epsilon: float
    seed: int
    trials: int
    mode: str
    per_element: dict[int, ElementStat] = field(default_factory=dict)

    @property
    def min_element(self) -> int:
        return min(self.per_element, key=lambda e: (self.per_element[e].freq, e))

    @property
    def min_frequency(self) -> float:
        return self.per_element[self.min_element].freq

    @property
    def min_ci(self) -> tuple[float, float]:
        s = self.per_element[self.min_element]
        return s.ci_lo, s.ci_hi

    def to_dict(self) -> dict:
        return {"algorithm": self.algorithm, "p": self.p, "epsilon": self.epsilon,
                "seed": self.seed, "trials": self.trials, "mode": self.mode,
                "min_element": self.min_element, "min_frequency": self.min_frequency,
                "min_ci": list(self.min_ci),
                "per_element": {str(e): asdict(s) for e, s in self.per_element.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["element_id", "hits", "trials", "freq", "ci_lo", "ci_hi"])
        for e, s in self.per_element.items():
            w.writerow([e, s.hits, s.trials, s.freq, s.ci_lo, s.ci_hi])
        return buf.getvalue()


def _raise_status(st: int) -> None:
    if st == D.ERR_RANK:
        raise RuntimeError("OPT of the sample has rank < 2; the partition algorithm needs an "
                           "augmented rank-2 instance")
    if st == D.ERR_BRANCH:
        raise AssertionError("Generation branch conditions disagree with the Gen != 1 rule")
    if st == D.ERR_SAFETY:
        raise RuntimeError("dummy generation exceeded the safety cap")
    if st < 0:
        raise RuntimeError(f"kernel error {st}")


def _chunks(trials: int):
    return [(t, min(t + CHUNK, trials)) for t in range(0, trials, CHUNK)]


def estimate(instance: MatroidInstance, algorithm: str, cfg: RunConfig, trials: int,
             seed: int, mode: str = "auto", threads: int | None = None,
             min_copies: int = 0) -> CompetitivenessReport:
    """Selection frequency of every element of OPT(E) over fresh trials."""
    check_compatible(algorithm, instance.kind)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    mode = resolve_mode(instance, mode)
    c = code_for(instance, mode)
    opt = np.array(instance.opt, dtype=np.int64)
    algo = ALGO_CODE[algorithm]
    eps = cfg.epsilon if algorithm in MIXTURES else 0.0

    def work(span):
        hits = np.zeros(len(opt), dtype=np.int64)
        if c.graphic:
            st = D.trials_graphic(seed, span[0], span[1], instance.n, c.real_rank, c.targets,
                                  c.mode, cfg.p, min_copies, algo, eps, c.ea, c.eb, c.nv1,
                                  opt, hits)
        else:
            st = D.trials_laminar(seed, span[0], span[1], instance.n, c.real_rank, c.targets,
                                  c.mode, c.r_stream, cfg.p, min_copies, algo, eps, c.chain,
                                  c.chain_len, c.cap, c.pclass, opt, hits)
        _raise_status(st)
        return hits

    spans = _chunks(trials)
    nthreads = min(threads or default_threads(), len(spans))
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            parts = list(ex.map(work, spans))
    else:
        parts = [work(s) for s in spans]
    total = np.sum(parts, axis=0)
    rep = CompetitivenessReport(algorithm, cfg.p, eps, seed, trials, mode)
    for e, h in zip(opt, total):
        lo, hi = wilson(int(h), trials)
        rep.per_element[int(e)] = ElementStat(int(h), trials, int(h) / trials, lo, hi)
    return rep


def compare_modes(instance, algorithm, cfg, trials, seed, threads=None) -> dict:
    """Augmented and plain runs side by side (the guarantees are only stated
    for the augmented instance)."""
    out = {}
    for mode in ("auto", "none"):
        try:
            out[resolve_mode(instance, mode)] = estimate(instance, algorithm, cfg, trials,
                                                         seed, mode, threads)
        except RuntimeError as exc:
            out[resolve_mode(instance, mode)] = str(exc)
    return out


# -- exact oracle ----------------------------------------------------------------

@dataclass
class ExactResult:
    per_element: dict[int, float]
    orders: int
    cuts: int
    branches: int
    total_weight: float
    mode: str

    def to_dict(self) -> dict:
        return {"per_element": {str(k): v for k, v in self.per_element.items()},
                "orders": self.orders, "cuts": self.cuts, "branches": self.branches,
                "total_weight": self.total_weight, "mode": self.mode}


def exact_oracle(instance: MatroidInstance, algorithm: str, cfg: RunConfig,
                 mode: str = "pinned") -> ExactResult:
    """Exact selection probabilities by enumerating arrival orders x cuts.

    Only deterministic dummy sets are allowed: ``none`` or ``pinned`` (one
    dummy per target, present before every real arrival).  The n <= 8 limit
    counts real elements.
    """
    check_compatible(algorithm, instance.kind)
    if instance.n > MAX_ORACLE_N:
        raise ValueError(f"exact oracle refuses n = {instance.n} > {MAX_ORACLE_N}")
    if mode == "off":
        mode = "none"
    if mode not in ("none", "pinned"):
        raise ValueError("the exact oracle needs a fixed dummy set (mode none or pinned), "
                         f"not stochastic augmentation {mode!r}")
    c = code_for(instance, mode)
    pin = c.targets if mode == "pinned" else np.zeros(0, dtype=np.int64)
    opt = np.array(instance.opt, dtype=np.int64)
    probs = np.zeros(len(opt))
    algo = ALGO_CODE[algorithm]
    eps = cfg.epsilon if algorithm in MIXTURES else 0.0
    if c.graphic:
        st, total = D.oracle_graphic(instance.n, c.real_rank, pin, algo, eps, cfg.p, c.ea, c.eb,
                                     c.nv1, opt, probs)
    else:
        st, total = D.oracle_laminar(instance.n, c.real_rank, pin, algo, eps, cfg.p, c.chain,
                                     c.chain_len, c.cap, c.pclass, opt, probs)
    _raise_status(st)
    if abs(total - 1.0) > 1e-9:
        raise AssertionError(f"case weights sum to {total!r}, not 1")
    return ExactResult({int(e): float(v) for e, v in zip(opt, probs)},
                       math.factorial(instance.n), instance.n + 1,
                       2 if algorithm in MIXTURES else 1, float(total), mode)


# -- Poisson structure -------------------------------------------------------

INTERVALS = ((0.25, 0.5), (0.5, 1.0), (0.25, 1.0))


def augmented_rank(instance: MatroidInstance) -> int:
    return instance.vertices if instance.kind == "graphic" else instance.rank


def interval_samples(instance: MatroidInstance, p: float, trials: int, seed: int,
                     bs=(1.0,), intervals=INTERVALS, mode: str = "auto"):
    """Per-trial S(b) (NaN when absent) and N[a,b) on the augmented instance."""
    mode = resolve_mode(instance, mode)
    c = code_for(instance, mode)
    bs = np.asarray(bs, dtype=float)
    a_arr = np.array([a for a, _ in intervals], dtype=float)
    b_arr = np.array([b for _, b in intervals], dtype=float)
    s_out = np.empty((trials, len(bs)))
    c_out = np.empty((trials, len(intervals)), dtype=np.int64)
    if c.graphic:
        st = D.stats_graphic(seed, 0, instance.n, c.real_rank, c.targets, c.mode, p, c.ea, c.eb,
                             c.nv1, bs, a_arr, b_arr, s_out, c_out)
    else:
        st = D.stats_laminar(seed, 0, instance.n, c.real_rank, c.targets, c.mode, c.r_stream, p,
                             c.chain, c.chain_len, c.cap, bs, a_arr, b_arr, s_out, c_out)
    _raise_status(st)
    return s_out, c_out


def poisson_chisquare(counts, lam: float) -> tuple[float, float, int]:
    """Chi-square of integer counts against Poisson(lam), merging tail bins
    until every expected count is >= 5.  Returns (statistic, p-value, bins)."""
    counts = np.asarray(counts)
    n = len(counts)
    top = int(max(counts.max(), lam + 10 * math.sqrt(lam) + 10)) + 1
    k = np.arange(top)
    pmf = stats.poisson.pmf(k, lam)
    exp = list(pmf * n)
    exp[-1] = stats.poisson.sf(top - 2, lam) * n          # last bin is the tail >= top-1
    obs = list(np.bincount(np.minimum(counts, top - 1), minlength=top).astype(float))
    while len(exp) > 1 and exp[-1] < 5:
        e, o = exp.pop(), obs.pop()
        exp[-1] += e
        obs[-1] += o
    while len(exp) > 1 and exp[0] < 5:
        e, o = exp.pop(0), obs.pop(0)
        exp[0] += e
        obs[0] += o
    if len(exp) < 2:
        return 0.0, 1.0, 1
    res = stats.chisquare(obs, exp)
    return float(res.statistic), float(res.pvalue), len(exp)


def distribution_tests(instance: MatroidInstance, p: float, trials: int, seed: int,
                       b: float = 1.0, intervals=INTERVALS, alpha: float = 0.01) -> dict:
    """KS of S(b) against (x/b)^r, chi-square of each N[a,b) against
    Poisson(r ln(b/a)), and the correlation of the first two (disjoint)
    interval counts.

    ``p`` is the augmentation threshold.  The truncated dummy streams agree
    with the infinite construction only after the last stopping copy, which
    arrives before p, so every interval must start at or after p.
    """
    if min(a for a, _ in intervals) < p or b < p:
        raise ValueError("intervals must lie in [p, 1]; pick a smaller augmentation p")
    r = augmented_rank(instance)
    s_out, c_out = interval_samples(instance, p, trials, seed, (b,), intervals)
    s = s_out[:, 0]
    present = s[~np.isnan(s)]
    ks = stats.kstest(present, lambda x: np.clip(x / b, 0.0, 1.0) ** r)
    out = {"r": r, "p": p, "trials": trials, "seed": seed, "b": b,
           "S_absent": int(np.isnan(s).sum()),
           "ks": {"statistic": float(ks.statistic), "pvalue": float(ks.pvalue)},
           "chi2": []}
    ok = ks.pvalue > alpha
    for j, (a, bb) in enumerate(intervals):
        lam = r * math.log(bb / a)
        stat, pv, bins = poisson_chisquare(c_out[:, j], lam)
        out["chi2"].append({"a": a, "b": bb, "rate": lam, "mean": float(c_out[:, j].mean()),
                            "statistic": stat, "pvalue": pv, "bins": bins})
        ok &= pv > alpha
    x, y = c_out[:, 0].astype(float), c_out[:, 1].astype(float)
    rho, rp = stats.pearsonr(x, y)
    out["independence"] = {"intervals": [list(intervals[0]), list(intervals[1])],
                           "pearson_r": float(rho), "pvalue": float(rp),
                           "threshold": 3.0 / math.sqrt(trials)}
    ok &= abs(rho) < 3.0 / math.sqrt(trials)
    out["passed"] = bool(ok)
    return out
