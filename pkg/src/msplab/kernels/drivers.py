"""Per-trial pipelines: draw events, replay, run an algorithm, count hits.

The same ``run_*`` functions back the single-sample Python API, the bulk
Monte Carlo loops and the exact enumeration oracle.
"""
import numpy as np

from .._jit import kernel
from . import graphic as G
from . import laminar as L
from .events import assemble, draw_real_times, gen_dummies
from .rng import stream_key, subkey, uniform

# algorithm codes
GREEDY = 0
PARTITION = 1
MIX_RANK2 = 2
BASIC = 3
GENERATION = 4
OBLIVIOUS = 5
MIX_GRAPHIC = 6

ERR_RANK = -1       # OPT at the cut too small for the partition algorithm
ERR_BRANCH = -2     # Generation branch conditions disagree with Gen != 1
ERR_SAFETY = -3     # dummy safety cap exceeded


@kernel
def prepare(key, n, real_rank, targets, mode, r_stream, p, min_copies,
            real_t, d_tgt, d_copy, d_t, order, ev_id, ev_tm, ev_rank, ev_dum,
            ev_t, pos_real):
    """Draw one trial into the event buffers.

    Returns ``(status, m, cut, coin)``.  status 0 = ok, ERR_SAFETY, or a
    positive dummy count when the buffers are too small (retry after growing).
    """
    attempt = 0
    k = key
    while True:
        coin = uniform(k, 0)
        draw_real_times(k, n, real_t)
        nd = gen_dummies(k, mode, targets, r_stream, p, min_copies, d_tgt, d_copy, d_t)
        if nd < 0:
            return ERR_SAFETY, 0, 0, coin
        if nd > d_t.shape[0] or n + nd > ev_t.shape[0]:
            return max(nd, 1), 0, 0, coin
        cut, ok = assemble(n, real_t, real_rank, nd, d_tgt, d_copy, d_t, targets, mode,
                           order, ev_id, ev_tm, ev_rank, ev_dum, ev_t, pos_real, p)
        if ok:
            return 0, n + nd, cut, coin
        attempt += 1
        k = subkey(key, -1 - attempt)


@kernel
def run_laminar(algo, coin, eps, m, cut, ev_tm, ev_rank, chain, chain_len, cap, pclass,
                imp, leave, setcnt, opt_list, opt_cut, algcnt, sel):
    """Replay and run a laminar-family algorithm.  Returns (status, branch)
    where branch is 1 when the oblivious/partition side of a mixture ran."""
    _, cut_n = L.replay(m, ev_tm, ev_rank, chain, chain_len, cap, cut, imp, leave,
                        setcnt, opt_list, opt_cut)
    branch = 0
    if algo == PARTITION or (algo == MIX_RANK2 and coin < eps):
        branch = 1
    if branch == 1:
        st = L.partition(m, cut, ev_tm, ev_rank, imp, pclass, opt_cut, cut_n, sel)
        return st, branch
    L.greedy(m, cut, ev_tm, imp, chain, chain_len, cap, algcnt, sel)
    return 0, branch


@kernel
def run_graphic(algo, coin, eps, m, cut, ev_id, ev_tm, ev_dum, ev_rank, ea, eb, nv1,
                parent, pe, mark, imp, leave, tail, head, cut_parent, snap_parent,
                snap_pe, uf, in_arc, gen_in, tail_in, tdeg_in, sel, gen_out):
    G.replay(m, ev_id, ev_tm, ev_dum, ev_rank, ea, eb, nv1, cut, parent, pe, mark,
             imp, leave, tail, head, cut_parent, snap_parent, snap_pe)
    for k in range(m):
        gen_out[k] = -1
    if algo == GREEDY:
        G.greedy(m, cut, ev_id, ev_tm, ev_dum, imp, ea, eb, nv1, uf, sel)
        return 0, 0
    if algo == OBLIVIOUS or (algo == MIX_GRAPHIC and coin < eps):
        G.oblivious(m, cut, ev_id, ev_tm, ev_dum, imp, ea, eb, nv1, cut_parent, uf, sel)
        return 0, 1
    gen = algo == GENERATION or algo == MIX_GRAPHIC
    st = G.aux_run(m, cut, ev_dum, imp, tail, head, nv1, gen, in_arc, gen_in, tail_in,
                   tdeg_in, sel, gen_out)
    return st, 0


@kernel
def _dummy_capacity(n, nt, p, mode, r_stream, min_copies):
    if mode == 0:
        return 1
    if mode == 3:
        return max(nt, 1)
    per = max(int(4.0 / p) + 8, min_copies + 8)
    if mode == 1:
        return max(r_stream, 1) * per
    return max(nt, 1) * per


@kernel
def trials_laminar(seed, t0, t1, n, real_rank, targets, mode, r_stream, p, min_copies,
                   algo, eps, chain, chain_len, cap, pclass, opt_real, hits):
    """Accumulate selection counts of the elements ``opt_real`` over trials
    ``t0..t1-1``.  Returns 0 or an error code."""
    dcap = _dummy_capacity(n, targets.shape[0], p, mode, r_stream, min_copies)
    ncap = n + dcap
    real_t = np.empty(max(n, 1))
    d_tgt = np.empty(dcap, np.int64)
    d_copy = np.empty(dcap, np.int64)
    d_t = np.empty(dcap)
    order = np.empty(ncap, np.int64)
    ev_id = np.empty(ncap, np.int64)
    ev_tm = np.empty(ncap, np.int64)
    ev_rank = np.empty(ncap, np.int64)
    ev_dum = np.empty(ncap, np.bool_)
    ev_t = np.empty(ncap)
    pos_real = np.empty(max(n, 1), np.int64)
    imp = np.empty(ncap, np.bool_)
    leave = np.empty(ncap, np.int64)
    sel = np.empty(ncap, np.bool_)
    setcnt = np.empty(cap.shape[0], np.int64)
    algcnt = np.empty(cap.shape[0], np.int64)
    rmax = n + targets.shape[0] + 1
    opt_list = np.empty(rmax, np.int64)
    opt_cut = np.empty(rmax, np.int64)
    for trial in range(t0, t1):
        key = stream_key(seed, trial)
        while True:
            st, m, cut, coin = prepare(key, n, real_rank, targets, mode, r_stream, p, min_copies,
                                       real_t, d_tgt, d_copy, d_t, order, ev_id, ev_tm, ev_rank,
                                       ev_dum, ev_t, pos_real)
            if st <= 0:
                break
            dcap = 2 * st
            ncap = n + dcap
            d_tgt = np.empty(dcap, np.int64)
            d_copy = np.empty(dcap, np.int64)
            d_t = np.empty(dcap)
            order = np.empty(ncap, np.int64)
            ev_id = np.empty(ncap, np.int64)
            ev_tm = np.empty(ncap, np.int64)
            ev_rank = np.empty(ncap, np.int64)
            ev_dum = np.empty(ncap, np.bool_)
            ev_t = np.empty(ncap)
            imp = np.empty(ncap, np.bool_)
            leave = np.empty(ncap, np.int64)
            sel = np.empty(ncap, np.bool_)
        if st < 0:
            return st
        st, _ = run_laminar(algo, coin, eps, m, cut, ev_tm, ev_rank, chain, chain_len, cap,
                            pclass, imp, leave, setcnt, opt_list, opt_cut, algcnt, sel)
        if st < 0:
            return st
        for j in range(opt_real.shape[0]):
            if sel[pos_real[opt_real[j]]]:
                hits[j] += 1
    return 0


@kernel
def trials_graphic(seed, t0, t1, n, real_rank, targets, mode, p, min_copies, algo, eps,
                   ea, eb, nv1, opt_real, hits):
    dcap = _dummy_capacity(n, targets.shape[0], p, mode, 0, min_copies)
    ncap = n + dcap
    real_t = np.empty(max(n, 1))
    d_tgt = np.empty(dcap, np.int64)
    d_copy = np.empty(dcap, np.int64)
    d_t = np.empty(dcap)
    order = np.empty(ncap, np.int64)
    ev_id = np.empty(ncap, np.int64)
    ev_tm = np.empty(ncap, np.int64)
    ev_rank = np.empty(ncap, np.int64)
    ev_dum = np.empty(ncap, np.bool_)
    ev_t = np.empty(ncap)
    pos_real = np.empty(max(n, 1), np.int64)
    imp = np.empty(ncap, np.bool_)
    leave = np.empty(ncap, np.int64)
    tail = np.empty(ncap, np.int64)
    head = np.empty(ncap, np.int64)
    sel = np.empty(ncap, np.bool_)
    gen_out = np.empty(ncap, np.int64)
    parent = np.empty(nv1, np.int64)
    pe = np.empty(nv1, np.int64)
    mark = np.empty(nv1, np.int64)
    cut_parent = np.empty(nv1, np.int64)
    uf = np.empty(nv1, np.int64)
    in_arc = np.empty(nv1, np.int64)
    gen_in = np.empty(nv1, np.int64)
    tail_in = np.empty(nv1, np.int64)
    tdeg_in = np.empty(nv1, np.int64)
    snap_parent = np.empty((0, nv1), np.int64)
    snap_pe = np.empty((0, nv1), np.int64)
    for trial in range(t0, t1):
        key = stream_key(seed, trial)
        while True:
            st, m, cut, coin = prepare(key, n, real_rank, targets, mode, 0, p, min_copies,
                                       real_t, d_tgt, d_copy, d_t, order, ev_id, ev_tm, ev_rank,
                                       ev_dum, ev_t, pos_real)
            if st <= 0:
                break
            dcap = 2 * st
            ncap = n + dcap
            d_tgt = np.empty(dcap, np.int64)
            d_copy = np.empty(dcap, np.int64)
            d_t = np.empty(dcap)
            order = np.empty(ncap, np.int64)
            ev_id = np.empty(ncap, np.int64)
            ev_tm = np.empty(ncap, np.int64)
            ev_rank = np.empty(ncap, np.int64)
            ev_dum = np.empty(ncap, np.bool_)
            ev_t = np.empty(ncap)
            imp = np.empty(ncap, np.bool_)
            leave = np.empty(ncap, np.int64)
            tail = np.empty(ncap, np.int64)
            head = np.empty(ncap, np.int64)
            sel = np.empty(ncap, np.bool_)
            gen_out = np.empty(ncap, np.int64)
        if st < 0:
            return st
        st, _ = run_graphic(algo, coin, eps, m, cut, ev_id, ev_tm, ev_dum, ev_rank, ea, eb, nv1,
                            parent, pe, mark, imp, leave, tail, head, cut_parent, snap_parent,
                            snap_pe, uf, in_arc, gen_in, tail_in, tdeg_in, sel, gen_out)
        if st < 0:
            return st
        for j in range(opt_real.shape[0]):
            if sel[pos_real[opt_real[j]]]:
                hits[j] += 1
    return 0


# -- improving-time statistics ---------------------------------------------

@kernel
def _interval_stats(m, imp, ev_t, bs, a_arr, b_arr, s_out, c_out, row):
    for i in range(bs.shape[0]):
        best = np.nan
        for k in range(m):
            if imp[k] and ev_t[k] < bs[i]:
                best = ev_t[k]
        s_out[row, i] = best
    for i in range(a_arr.shape[0]):
        c = 0
        for k in range(m):
            if imp[k] and a_arr[i] <= ev_t[k] < b_arr[i]:
                c += 1
        c_out[row, i] = c


@kernel
def stats_laminar(seed, t0, n, real_rank, targets, mode, r_stream, p, chain, chain_len, cap,
                  bs, a_arr, b_arr, s_out, c_out):
    """Per trial: S(b) for each b in ``bs`` and N[a,b) per interval."""
    trials = s_out.shape[0]
    dcap = _dummy_capacity(n, targets.shape[0], p, mode, r_stream, 0)
    ncap = n + dcap
    real_t = np.empty(max(n, 1))
    d_tgt = np.empty(dcap, np.int64)
    d_copy = np.empty(dcap, np.int64)
    d_t = np.empty(dcap)
    order = np.empty(ncap, np.int64)
    ev_id = np.empty(ncap, np.int64)
    ev_tm = np.empty(ncap, np.int64)
    ev_rank = np.empty(ncap, np.int64)
    ev_dum = np.empty(ncap, np.bool_)
    ev_t = np.empty(ncap)
    pos_real = np.empty(max(n, 1), np.int64)
    imp = np.empty(ncap, np.bool_)
    leave = np.empty(ncap, np.int64)
    setcnt = np.empty(cap.shape[0], np.int64)
    rmax = n + targets.shape[0] + 1
    opt_list = np.empty(rmax, np.int64)
    opt_cut = np.empty(rmax, np.int64)
    for row in range(trials):
        key = stream_key(seed, t0 + row)
        while True:
            st, m, cut, coin = prepare(key, n, real_rank, targets, mode, r_stream, p, 0,
                                       real_t, d_tgt, d_copy, d_t, order, ev_id, ev_tm, ev_rank,
                                       ev_dum, ev_t, pos_real)
            if st <= 0:
                break
            dcap = 2 * st
            ncap = n + dcap
            d_tgt = np.empty(dcap, np.int64)
            d_copy = np.empty(dcap, np.int64)
            d_t = np.empty(dcap)
            order = np.empty(ncap, np.int64)
            ev_id = np.empty(ncap, np.int64)
            ev_tm = np.empty(ncap, np.int64)
            ev_rank = np.empty(ncap, np.int64)
            ev_dum = np.empty(ncap, np.bool_)
            ev_t = np.empty(ncap)
            imp = np.empty(ncap, np.bool_)
            leave = np.empty(ncap, np.int64)
        if st < 0:
            return st
        L.replay(m, ev_tm, ev_rank, chain, chain_len, cap, cut, imp, leave, setcnt, opt_list,
                 opt_cut)
        _interval_stats(m, imp, ev_t, bs, a_arr, b_arr, s_out, c_out, row)
    return 0


@kernel
def stats_graphic(seed, t0, n, real_rank, targets, mode, p, ea, eb, nv1, bs, a_arr, b_arr,
                  s_out, c_out):
    trials = s_out.shape[0]
    dcap = _dummy_capacity(n, targets.shape[0], p, mode, 0, 0)
    ncap = n + dcap
    real_t = np.empty(max(n, 1))
    d_tgt = np.empty(dcap, np.int64)
    d_copy = np.empty(dcap, np.int64)
    d_t = np.empty(dcap)
    order = np.empty(ncap, np.int64)
    ev_id = np.empty(ncap, np.int64)
    ev_tm = np.empty(ncap, np.int64)
    ev_rank = np.empty(ncap, np.int64)
    ev_dum = np.empty(ncap, np.bool_)
    ev_t = np.empty(ncap)
    pos_real = np.empty(max(n, 1), np.int64)
    imp = np.empty(ncap, np.bool_)
    leave = np.empty(ncap, np.int64)
    tail = np.empty(ncap, np.int64)
    head = np.empty(ncap, np.int64)
    parent = np.empty(nv1, np.int64)
    pe = np.empty(nv1, np.int64)
    mark = np.empty(nv1, np.int64)
    cut_parent = np.empty(nv1, np.int64)
    snap_parent = np.empty((0, nv1), np.int64)
    snap_pe = np.empty((0, nv1), np.int64)
    for row in range(trials):
        key = stream_key(seed, t0 + row)
        while True:
            st, m, cut, coin = prepare(key, n, real_rank, targets, mode, 0, p, 0,
                                       real_t, d_tgt, d_copy, d_t, order, ev_id, ev_tm, ev_rank,
                                       ev_dum, ev_t, pos_real)
            if st <= 0:
                break
            dcap = 2 * st
            ncap = n + dcap
            d_tgt = np.empty(dcap, np.int64)
            d_copy = np.empty(dcap, np.int64)
            d_t = np.empty(dcap)
            order = np.empty(ncap, np.int64)
            ev_id = np.empty(ncap, np.int64)
            ev_tm = np.empty(ncap, np.int64)
            ev_rank = np.empty(ncap, np.int64)
            ev_dum = np.empty(ncap, np.bool_)
            ev_t = np.empty(ncap)
            imp = np.empty(ncap, np.bool_)
            leave = np.empty(ncap, np.int64)
            tail = np.empty(ncap, np.int64)
            head = np.empty(ncap, np.int64)
        if st < 0:
            return st
        G.replay(m, ev_id, ev_tm, ev_dum, ev_rank, ea, eb, nv1, cut, parent, pe, mark, imp,
                 leave, tail, head, cut_parent, snap_parent, snap_pe)
        _interval_stats(m, imp, ev_t, bs, a_arr, b_arr, s_out, c_out, row)
    return 0


# -- exact enumeration --------------------------------------------------------

@kernel
def _binom_weights(n, p):
    w = np.empty(n + 1)
    fact = 1.0
    for i in range(2, n + 1):
        fact *= i
    c = 1.0
    for k in range(n + 1):
        w[k] = c * p ** k * (1.0 - p) ** (n - k) / fact
        c = c * (n - k) / (k + 1)
    return w


@kernel
def _next_perm(a):
    # lexicographic successor in place; False after the last permutation
    n = a.shape[0]
    i = n - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    lo = i + 1
    hi = n - 1
    while lo < hi:
        a[lo], a[hi] = a[hi], a[lo]
        lo += 1
        hi -= 1
    return True


@kernel
def _pinned_prefix(n, pin_tm, ev_id, ev_tm, ev_rank, ev_dum):
    npin = pin_tm.shape[0]
    for i in range(npin):
        ev_id[i] = n + i
        ev_tm[i] = pin_tm[i]
        ev_rank[i] = n + i
        ev_dum[i] = True
    return npin


@kernel
def oracle_laminar(n, real_rank, pin_tm, algo, eps, p, chain, chain_len, cap, pclass,
                   opt_real, probs):
    """Exact selection probabilities by enumerating orders x cut sizes.

    Returns ``(status, total weight)``.
    """
    w = _binom_weights(n, p)
    npin = pin_tm.shape[0]
    m = n + npin
    ev_id = np.empty(m, np.int64)
    ev_tm = np.empty(m, np.int64)
    ev_rank = np.empty(m, np.int64)
    ev_dum = np.empty(m, np.bool_)
    pos_real = np.empty(max(n, 1), np.int64)
    imp = np.empty(m, np.bool_)
    leave = np.empty(m, np.int64)
    sel = np.empty(m, np.bool_)
    setcnt = np.empty(cap.shape[0], np.int64)
    algcnt = np.empty(cap.shape[0], np.int64)
    opt_list = np.empty(m + 1, np.int64)
    opt_cut = np.empty(m + 1, np.int64)
    _pinned_prefix(n, pin_tm, ev_id, ev_tm, ev_rank, ev_dum)
    perm = np.arange(n)
    mixture = algo == MIX_RANK2
    total = 0.0
    while True:
        for s in range(n):
            e = perm[s]
            ev_id[npin + s] = e
            ev_tm[npin + s] = e
            ev_rank[npin + s] = real_rank[e]
            ev_dum[npin + s] = False
            pos_real[e] = npin + s
        for k in range(n + 1):
            for br in range(2 if mixture else 1):
                wt = w[k]
                coin = 0.5
                if mixture:
                    coin = 0.0 if br == 1 else 1.0
                    wt *= eps if br == 1 else 1.0 - eps
                    if wt == 0.0:
                        continue
                st, _ = run_laminar(algo, coin, eps, m, npin + k, ev_tm, ev_rank, chain,
                                    chain_len, cap, pclass, imp, leave, setcnt, opt_list,
                                    opt_cut, algcnt, sel)
                if st < 0:
                    return st, total
                total += wt
                for j in range(opt_real.shape[0]):
                    if sel[pos_real[opt_real[j]]]:
                        probs[j] += wt
        if not _next_perm(perm):
            break
    return 0, total


@kernel
def oracle_graphic(n, real_rank, pin_tm, algo, eps, p, ea, eb, nv1, opt_real, probs):
    w = _binom_weights(n, p)
    npin = pin_tm.shape[0]
    m = n + npin
    ev_id = np.empty(m, np.int64)
    ev_tm = np.empty(m, np.int64)
    ev_rank = np.empty(m, np.int64)
    ev_dum = np.empty(m, np.bool_)
    pos_real = np.empty(max(n, 1), np.int64)
    imp = np.empty(m, np.bool_)
    leave = np.empty(m, np.int64)
    tail = np.empty(m, np.int64)
    head = np.empty(m, np.int64)
    sel = np.empty(m, np.bool_)
    gen_out = np.empty(m, np.int64)
    parent = np.empty(nv1, np.int64)
    pe = np.empty(nv1, np.int64)
    mark = np.empty(nv1, np.int64)
    cut_parent = np.empty(nv1, np.int64)
    uf = np.empty(nv1, np.int64)
    in_arc = np.empty(nv1, np.int64)
    gen_in = np.empty(nv1, np.int64)
    tail_in = np.empty(nv1, np.int64)
    tdeg_in = np.empty(nv1, np.int64)
    snap_parent = np.empty((0, nv1), np.int64)
    snap_pe = np.empty((0, nv1), np.int64)
    _pinned_prefix(n, pin_tm, ev_id, ev_tm, ev_rank, ev_dum)
    perm = np.arange(n)
    mixture = algo == MIX_GRAPHIC
    total = 0.0
    while True:
        for s in range(n):
            e = perm[s]
            ev_id[npin + s] = e
            ev_tm[npin + s] = e
            ev_rank[npin + s] = real_rank[e]
            ev_dum[npin + s] = False
            pos_real[e] = npin + s
        for k in range(n + 1):
            for br in range(2 if mixture else 1):
                wt = w[k]
                coin = 0.5
                if mixture:
                    coin = 0.0 if br == 1 else 1.0
                    wt *= eps if br == 1 else 1.0 - eps
                    if wt == 0.0:
                        continue
                st, _ = run_graphic(algo, coin, eps, m, npin + k, ev_id, ev_tm, ev_dum, ev_rank,
                                    ea, eb, nv1, parent, pe, mark, imp, leave, tail, head,
                                    cut_parent, snap_parent, snap_pe, uf, in_arc, gen_in,
                                    tail_in, tdeg_in, sel, gen_out)
                if st < 0:
                    return st, total
                total += wt
                for j in range(opt_real.shape[0]):
                    if sel[pos_real[opt_real[j]]]:
                        probs[j] += wt
        if not _next_perm(perm):
            break
    return 0, total
