"""The seven online algorithms, run on one (augmented instance, sample) pair.

All of them read the arrivals through the same replay kernel.  Dummy
elements can be accepted internally (they consume capacity exactly as the
augmented analysis prescribes) but are dropped from ``selected``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .arrivals import AugmentedInstance, ArrivalSample, build_events
from .kernels import drivers as D

ALGORITHMS = ("greedy", "oblivious-partition", "mixture-rank2", "basic", "generation",
              "oblivious-graphic", "mixture-graphic")

ALGO_CODE = {"greedy": D.GREEDY, "oblivious-partition": D.PARTITION,
             "mixture-rank2": D.MIX_RANK2, "basic": D.BASIC, "generation": D.GENERATION,
             "oblivious-graphic": D.OBLIVIOUS, "mixture-graphic": D.MIX_GRAPHIC}

MIXTURES = ("mixture-rank2", "mixture-graphic")


def check_compatible(algorithm: str, kind: str) -> None:
    if algorithm not in ALGO_CODE:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    if algorithm in ("oblivious-partition", "mixture-rank2") and kind != "rank2":
        raise ValueError(f"{algorithm} needs a rank-2 instance")
    if algorithm in ("basic", "generation", "oblivious-graphic", "mixture-graphic") \
            and kind != "graphic":
        raise ValueError(f"{algorithm} needs a graphic instance")


@dataclass(frozen=True)
class RunConfig:
    p: float
    epsilon: float = 0.0
    coin: float | None = None     # pre-drawn mixture coin in [0,1); oblivious side iff coin < eps

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


class Arc(NamedTuple):
    tail: int
    head: int
    elem: int
    time: float
    gen: int


@dataclass
class AuxDigraph:
    arcs: list[Arc] = field(default_factory=list)

    def in_degree(self) -> dict[int, int]:
        deg: dict[int, int] = {}
        for a in self.arcs:
            deg[a.head] = deg.get(a.head, 0) + 1
        return deg


@dataclass
class RunOutcome:
    selected: frozenset
    internal: frozenset               # including accepted dummies
    aux: AuxDigraph | None = None
    branch: str | None = None


_BRANCH = {("mixture-rank2", 0): "greedy", ("mixture-rank2", 1): "oblivious-partition",
           ("mixture-graphic", 0): "generation", ("mixture-graphic", 1): "oblivious-graphic"}


def run(algorithm: str, aug: AugmentedInstance, sample: ArrivalSample, cfg: RunConfig,
        rng: np.random.Generator | None = None) -> RunOutcome:
    inst = aug.base
    check_compatible(algorithm, inst.kind)
    if abs(cfg.p - aug.p) > 1e-15 and aug.mode != "none":
        raise ValueError("run config p differs from the augmentation p")
    coin = 0.5
    if algorithm in MIXTURES:
        if cfg.coin is not None:
            coin = cfg.coin
        elif rng is not None:
            coin = float(rng.random())
        else:
            raise ValueError("mixtures need a pre-drawn coin or an rng")
    aug_p = AugmentedInstance(inst, aug.mode, cfg.p, aug.dummies)
    ev = build_events(aug_p, sample)
    c, m = ev.code, ev.m
    code = ALGO_CODE[algorithm]
    imp = np.zeros(m, np.bool_)
    leave = np.empty(m, np.int64)
    sel = np.zeros(m, np.bool_)
    aux = None
    if c.graphic:
        nv1 = c.nv1
        tail = np.empty(m, np.int64)
        head = np.empty(m, np.int64)
        gen = np.empty(m, np.int64)
        e1 = lambda: np.empty(nv1, np.int64)  # noqa: E731
        st, br = D.run_graphic(code, coin, cfg.epsilon, m, ev.cut, ev.ev_id, ev.ev_tm, ev.ev_dum,
                               ev.ev_rank, c.ea, c.eb, nv1, e1(), e1(), e1(), imp, leave, tail,
                               head, e1(), np.empty((0, nv1), np.int64),
                               np.empty((0, nv1), np.int64), e1(), e1(), e1(), e1(), e1(), sel,
                               gen)
        if algorithm in ("basic", "generation", "mixture-graphic") and not br:
            aux = AuxDigraph([Arc(int(tail[k]), int(head[k]), int(ev.ev_id[k]), float(ev.ev_t[k]),
                                  int(gen[k])) for k in range(m) if gen[k] >= 0])
    else:
        nset = len(c.cap)
        st, br = D.run_laminar(code, coin, cfg.epsilon, m, ev.cut, ev.ev_tm, ev.ev_rank, c.chain,
                               c.chain_len, c.cap, c.pclass, imp, leave, np.empty(nset, np.int64),
                               np.empty(m + 1, np.int64), np.empty(m + 1, np.int64),
                               np.empty(nset, np.int64), sel)
    if st == D.ERR_RANK:
        raise RuntimeError("OPT of the sample has rank < 2; the partition algorithm needs an "
                           "augmented rank-2 instance")
    if st == D.ERR_BRANCH:
        raise AssertionError("Generation branch conditions disagree with the Gen != 1 rule")
    internal = frozenset(int(ev.ev_id[k]) for k in range(m) if sel[k])
    selected = frozenset(e for e in internal if e < inst.n)
    branch = _BRANCH.get((algorithm, int(br))) if algorithm in MIXTURES else None
    return RunOutcome(selected, internal, aux, branch)


def greedy_improving(aug, sample, cfg):
    return run("greedy", aug, sample, cfg)


def oblivious_partition_rank2(aug, sample, cfg):
    return run("oblivious-partition", aug, sample, cfg)


def mixture_rank2(aug, sample, cfg, rng=None):
    return run("mixture-rank2", aug, sample, cfg, rng)


def basic_graphic(aug, sample, cfg):
    return run("basic", aug, sample, cfg)


def generation_graphic(aug, sample, cfg):
    return run("generation", aug, sample, cfg)


def oblivious_graphic(aug, sample, cfg):
    return run("oblivious-graphic", aug, sample, cfg)


def mixture_graphic(aug, sample, cfg, rng=None):
    return run("mixture-graphic", aug, sample, cfg, rng)


def aux_generations(arcs) -> list[int]:
    """Generations of an AUX arc sequence [(tail, head, is_dummy), ...] given
    in insertion order (each head must be new).  Used to check small
    hand-built examples independently of any replay."""
    gen_in: dict[int, int] = {}
    out = []
    for u, v, dummy in arcs:
        if v in gen_in:
            raise ValueError(f"vertex {v} already has an incoming arc")
        if dummy:
            g = 1
        elif u not in gen_in:
            g = 0
        else:
            g = gen_in[u] + 1
        gen_in[v] = g
        out.append(g)
    return out
