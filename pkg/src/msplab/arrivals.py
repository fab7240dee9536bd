"""Arrival times, augmentation and improving traces.

Augmentation modes
------------------
``none``            no dummies.
``uniform-stream``  one stream of dummies d1 > d2 > ... (all mutually
                    non-parallel), stopped once r of them arrived before p.
``laminar-copies``  for each element f of B0 = OPT(E), copies parallel to f
                    with decreasing rank until one arrives before p.
``graphic-root``    for each vertex v, copies of the edge (w, v) to the extra
                    root w until one arrives before p.
``pinned``          one dummy per target (r dummies for uniform) at negative
                    times, i.e. present before every real arrival.  This is
                    the fixed finite dummy set used by the exact oracle.

Dummy copies of target j with copy index c are ranked by (c, j), below all
real elements.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .kernels import events as EV
from .kernels import graphic as KG
from .kernels import laminar as KL
from .kernels.drivers import prepare
from .kernels.rng import as_key, stream_key
from .matroids import MatroidInstance, graphic_code, laminar_code

MODES = ("none", "uniform-stream", "laminar-copies", "graphic-root", "pinned")
_MODE_CODE = {"none": EV.OFF, "uniform-stream": EV.STREAM, "laminar-copies": EV.COPIES,
              "graphic-root": EV.COPIES, "pinned": EV.PINNED}


def resolve_mode(inst: MatroidInstance, mode: str = "auto") -> str:
    if mode in ("auto", "on"):
        return {"uniform": "uniform-stream", "laminar": "laminar-copies",
                "rank2": "laminar-copies", "graphic": "graphic-root"}[inst.kind]
    if mode == "off":
        return "none"
    if mode not in MODES:
        raise ValueError(f"unknown augmentation mode {mode!r}")
    if mode == "uniform-stream" and inst.kind != "uniform":
        raise ValueError("uniform-stream augmentation needs a uniform matroid")
    if mode == "laminar-copies" and inst.kind == "graphic":
        raise ValueError("graphic instances use graphic-root augmentation")
    if mode == "graphic-root" and inst.kind != "graphic":
        raise ValueError("graphic-root augmentation needs a graphic matroid")
    return mode


class Code(NamedTuple):
    """Kernel-ready arrays for one (instance, augmentation mode) pair."""
    graphic: bool
    mode: int
    targets: np.ndarray
    r_stream: int
    real_rank: np.ndarray
    chain: np.ndarray
    chain_len: np.ndarray
    cap: np.ndarray
    pclass: np.ndarray
    ea: np.ndarray
    eb: np.ndarray
    nv1: int


_EMPTY = np.zeros(1, dtype=np.int64)
_EMPTY2 = np.zeros((1, 1), dtype=np.int64)


def _targets(inst: MatroidInstance, mode: str) -> np.ndarray:
    if mode == "none":
        return np.zeros(0, dtype=np.int64)
    if inst.kind == "graphic":
        return np.arange(inst.vertices, dtype=np.int64)
    if inst.kind == "uniform":
        return np.zeros(1 if mode == "uniform-stream" else inst.r, dtype=np.int64)
    return np.array(inst.opt, dtype=np.int64)


def code_for(inst: MatroidInstance, mode: str) -> Code:
    """Cached kernel encoding; ``mode`` must already be resolved."""
    cache = inst.__dict__.setdefault("_codes", {})
    if mode not in cache:
        targets = _targets(inst, mode)
        rank = inst.position.astype(np.int64)
        if inst.kind == "graphic":
            ea, eb = graphic_code(inst)
            cache[mode] = Code(True, _MODE_CODE[mode], targets, 0, rank, _EMPTY2, _EMPTY,
                               _EMPTY, _EMPTY, ea, eb, inst.vertices + 1)
        else:
            pin = () if inst.kind == "uniform" else tuple(int(x) for x in inst.opt)
            chain, chain_len, cap, pclass = laminar_code(inst, pin)
            r_stream = inst.r if inst.kind == "uniform" else 0
            cache[mode] = Code(False, _MODE_CODE[mode], targets, int(r_stream or 0), rank,
                               chain, chain_len, cap, pclass, _EMPTY, _EMPTY, 0)
    return cache[mode]


# -- data types -------------------------------------------------------------

@dataclass(frozen=True)
class Dummy:
    id: int
    target: int        # target element (laminar), vertex (graphic), 0 (uniform)
    copy: int
    rank: int          # global rank, always >= n
    time: float
    is_dummy: bool = True


@dataclass(frozen=True)
class AugmentedInstance:
    base: MatroidInstance
    mode: str
    p: float
    dummies: tuple[Dummy, ...] = ()

    @property
    def root(self) -> int | None:
        return self.base.vertices if self.base.kind == "graphic" else None

    def is_dummy(self, e: int) -> bool:
        return e >= self.base.n

    def endpoints(self, e: int) -> tuple[int, int]:
        """Endpoints of a real edge or of a dummy root edge (w, v)."""
        if e < self.base.n:
            return self.base.edges[e]
        return (self.base.vertices, self.dummies[e - self.base.n].target)


@dataclass(frozen=True)
class ArrivalSample:
    times: np.ndarray          # arrival time of real element i

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True)
class TraceRecord:
    time: float
    elem: int
    opt_before: frozenset
    opt_after: frozenset
    left: int | None = None
    arc: tuple[int, int] | None = None
    arborescence: dict | None = None    # vertex -> (parent, element)


@dataclass
class ImprovingTrace:
    records: list[TraceRecord] = field(default_factory=list)
    p: float = 0.0
    aug: AugmentedInstance | None = None

    def times(self) -> list[float]:
        return [r.time for r in self.records]

    def elements(self) -> list[int]:
        return [r.elem for r in self.records]

    def to_jsonl(self) -> str:
        lines = []
        for r in self.records:
            d = {"t": r.time, "elem": r.elem, "opt": sorted(r.opt_after)}
            if r.arc is not None:
                d["arc"] = list(r.arc)
            lines.append(json.dumps(d))
        return "\n".join(lines)


# -- sampling ------------------------------------------------------------------

def sample_arrivals(instance: MatroidInstance, rng: np.random.Generator) -> ArrivalSample:
    """i.i.d. U(0,1) arrival times; zeros and collisions are redrawn."""
    t = rng.random(instance.n)
    while True:
        bad = t <= 0.0
        _, first = np.unique(t, return_index=True)
        dup = np.ones(len(t), dtype=bool)
        dup[first] = False
        bad |= dup
        if not bad.any():
            return ArrivalSample(t)
        t[bad] = rng.random(int(bad.sum()))


def _draw_dummies(inst: MatroidInstance, mode: str, p: float, key, min_copies: int):
    code = code_for(inst, mode)
    size = 64
    while True:
        tgt = np.empty(size, np.int64)
        cp = np.empty(size, np.int64)
        tt = np.empty(size)
        nd = EV.gen_dummies(key, code.mode, code.targets, code.r_stream, p, min_copies,
                            tgt, cp, tt)
        if nd < 0:
            raise RuntimeError("dummy generation exceeded the safety cap of "
                               f"{EV.SAFETY_CAP} copies per target")
        if nd <= size:
            return tgt[:nd], cp[:nd], tt[:nd]
        size = 2 * nd


def _dummies_from_arrays(inst: MatroidInstance, mode: str, tgt, cp, tt) -> tuple[Dummy, ...]:
    code = code_for(inst, mode)
    nt = len(code.targets)
    out = []
    for k in range(len(tt)):
        if code.mode in (EV.STREAM, EV.PINNED):
            rank = inst.n + k
        else:
            rank = inst.n + int(cp[k]) * nt + int(tgt[k])
        out.append(Dummy(inst.n + k, int(code.targets[tgt[k]]), int(cp[k]), rank, float(tt[k])))
    return tuple(out)


def augment(instance: MatroidInstance, p: float, rng: np.random.Generator,
            mode: str = "auto", min_copies: int = 0) -> AugmentedInstance:
    """Truncated dummy construction (see module docstring).

    ``min_copies`` keeps drawing each copy stream until at least that many
    copies exist (the same stream, so the default population is a prefix).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    mode = resolve_mode(instance, mode)
    if mode == "none":
        return AugmentedInstance(instance, mode, p)
    key = as_key(stream_key(int(rng.integers(0, 2**63 - 1)), 0))
    tgt, cp, tt = _draw_dummies(instance, mode, p, key, min_copies)
    return AugmentedInstance(instance, mode, p, _dummies_from_arrays(instance, mode, tgt, cp, tt))


def trial_sample(instance: MatroidInstance, p: float, seed: int, trial: int,
                 mode: str = "auto", min_copies: int = 0):
    """Exactly the (augmentation, sample, coin) that bulk trial ``trial`` of
    ``seed`` uses inside the compiled loops."""
    mode = resolve_mode(instance, mode)
    code = code_for(instance, mode)
    n = instance.n
    size = 64
    key = as_key(stream_key(seed, trial))
    while True:
        bufs = _buffers(n, size)
        st, m, cut, coin = prepare(key, n, code.real_rank, code.targets, code.mode,
                                   code.r_stream, p, min_copies, *bufs)
        if st == 0:
            break
        if st < 0:
            raise RuntimeError("dummy generation exceeded the safety cap")
        size = 2 * st
    real_t, d_tgt, d_cp, d_t = bufs[0], bufs[1], bufs[2], bufs[3]
    nd = m - n
    aug = AugmentedInstance(instance, mode, p,
                            _dummies_from_arrays(instance, mode, d_tgt[:nd], d_cp[:nd], d_t[:nd]))
    return aug, ArrivalSample(real_t[:n].copy()), float(coin)


def _buffers(n: int, dcap: int):
    ncap = n + dcap
    return (np.empty(max(n, 1)), np.empty(dcap, np.int64), np.empty(dcap, np.int64),
            np.empty(dcap), np.empty(ncap, np.int64), np.empty(ncap, np.int64),
            np.empty(ncap, np.int64), np.empty(ncap, np.int64), np.empty(ncap, np.bool_),
            np.empty(ncap), np.empty(max(n, 1), np.int64))


# -- event arrays ----------------------------------------------------------------

class Events(NamedTuple):
    m: int
    cut: int
    ev_id: np.ndarray
    ev_tm: np.ndarray
    ev_rank: np.ndarray
    ev_dum: np.ndarray
    ev_t: np.ndarray
    pos_real: np.ndarray
    code: Code


def build_events(aug: AugmentedInstance, sample: ArrivalSample) -> Events:
    inst = aug.base
    if len(sample.times) != inst.n:
        raise ValueError("sample does not match the instance size")
    code = code_for(inst, aug.mode)
    n, nd = inst.n, len(aug.dummies)
    if code.mode == EV.PINNED:
        d_tgt = np.arange(nd, dtype=np.int64)
    elif code.mode == EV.STREAM:
        d_tgt = np.zeros(nd, dtype=np.int64)
    else:
        index = {int(t): j for j, t in enumerate(code.targets)}
        d_tgt = np.array([index[d.target] for d in aug.dummies], dtype=np.int64)
    d_cp = np.array([d.copy for d in aug.dummies], dtype=np.int64)
    d_t = np.array([d.time for d in aug.dummies], dtype=float)
    m = n + nd
    order = np.empty(m, np.int64)
    ev_id = np.empty(m, np.int64)
    ev_tm = np.empty(m, np.int64)
    ev_rank = np.empty(m, np.int64)
    ev_dum = np.empty(m, np.bool_)
    ev_t = np.empty(m)
    pos_real = np.empty(max(n, 1), np.int64)
    cut, ok = EV.assemble(n, np.asarray(sample.times, dtype=float), code.real_rank, nd,
                          d_tgt, d_cp, d_t, code.targets, code.mode, order, ev_id, ev_tm,
                          ev_rank, ev_dum, ev_t, pos_real, aug.p)
    if not ok:
        raise ValueError("arrival times must be positive and pairwise distinct")
    return Events(m, int(cut), ev_id, ev_tm, ev_rank, ev_dum, ev_t, pos_real, code)


def replay_events(ev: Events, snapshots: bool = False):
    """Run the replay kernel; returns a dict of per-event arrays."""
    c, m = ev.code, ev.m
    imp = np.zeros(m, np.bool_)
    leave = np.full(m, -1, np.int64)
    out = {"imp": imp, "leave": leave}
    if c.graphic:
        nv1 = c.nv1
        tail = np.full(m, -1, np.int64)
        head = np.full(m, -1, np.int64)
        cut_parent = np.empty(nv1, np.int64)
        rows = m if snapshots else 0
        sp = np.full((rows, nv1), -1, np.int64)
        spe = np.full((rows, nv1), -1, np.int64)
        KG.replay(m, ev.ev_id, ev.ev_tm, ev.ev_dum, ev.ev_rank, c.ea, c.eb, nv1, ev.cut,
                  np.empty(nv1, np.int64), np.empty(nv1, np.int64), np.empty(nv1, np.int64),
                  imp, leave, tail, head, cut_parent, sp, spe)
        out.update(tail=tail, head=head, cut_parent=cut_parent, snap_parent=sp, snap_pe=spe)
    else:
        rmax = m + 1
        opt_cut = np.empty(rmax, np.int64)
        _, cut_n = KL.replay(m, ev.ev_tm, ev.ev_rank, c.chain, c.chain_len, c.cap, ev.cut, imp,
                             leave, np.empty(len(c.cap), np.int64), np.empty(rmax, np.int64),
                             opt_cut)
        out.update(opt_cut=opt_cut[:cut_n].copy())
    return out


def improving_trace(aug: AugmentedInstance, sample: ArrivalSample) -> ImprovingTrace:
    """Record every improving arrival with the optimum before and after it.

    Graphic traces also carry the oriented arc and the arborescence rooted at
    w; they need an augmented instance, since orientation is undefined before
    the optimum spans all vertices.
    """
    inst = aug.base
    graphic = inst.kind == "graphic"
    if graphic and aug.mode == "none":
        raise ValueError("graphic traces need an augmented instance (root w)")
    ev = build_events(aug, sample)
    rp = replay_events(ev, snapshots=graphic)
    imp, leave = rp["imp"], rp["leave"]
    opt: set[int] = set()
    recs = []
    for k in range(ev.m):
        if not imp[k]:
            continue
        before = frozenset(opt)
        x = int(ev.ev_id[k])
        left = None
        if leave[k] >= 0:
            left = int(ev.ev_id[leave[k]])
            opt.discard(left)
        opt.add(x)
        arc = arb = None
        if graphic:
            arc = (int(rp["tail"][k]), int(rp["head"][k]))
            arb = {v: (int(rp["snap_parent"][k, v]), int(ev.ev_id[rp["snap_pe"][k, v]]))
                   for v in range(ev.code.nv1) if rp["snap_parent"][k, v] >= 0}
        recs.append(TraceRecord(float(ev.ev_t[k]), x, before, frozenset(opt), left, arc, arb))
    return ImprovingTrace(recs, aug.p, aug)


def improving_stats(trace: ImprovingTrace, a: float, b: float) -> dict:
    """S(b) (last improving time before b, None if absent) and N[a,b)."""
    if not 0.0 <= a < b <= 1.0:
        raise ValueError("need 0 <= a < b <= 1")
    ts = trace.times()
    before = [t for t in ts if t < b]
    return {"S": max(before) if before else None,
            "count": sum(1 for t in ts if a <= t < b)}
