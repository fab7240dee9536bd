"""Language predicates, random-word sampling and paired word/selection checks.

Words are int64 arrays of symbols >= 1, ordered by decreasing time.
"""
import numpy as np

from .._jit import kernel
from .drivers import prepare, run_graphic, run_laminar
from .rng import poisson, stream_key, uniform

LANG_UNIFORM = 0
LANG_LAMINAR = 1
LANG_BASIC = 2
LANG_GENERATION = 3
LANG_FORBIDDEN = 4

SCHEME_CHAIN = 0     # also the induced e*-first order (all chain keys equal)
SCHEME_LAMBDA0 = 1
SCHEME_LAMBDA1 = 2

OTHER_LABEL = 4      # stand-in for labels the graphic languages never read


@kernel
def well_indexed_suffix(z, lo, hi):
    """Condition (wi) on y = z[lo:hi]: #{y_i <= c} <= c - 1 for c = 1..|y|."""
    ylen = hi - lo
    cnt = np.zeros(ylen + 2, np.int64)
    for i in range(lo, hi):
        v = z[i]
        if v <= ylen:
            cnt[v] += 1
    acc = 0
    for c in range(1, ylen + 1):
        acc += cnt[c]
        if acc > c - 1:
            return False
    return True


@kernel
def in_lang(code, z, k, r, q):
    if code == LANG_UNIFORM:
        for i in range(k):
            if z[i] == 1:
                return k - 1 - i <= r - 1
        return False
    if code == LANG_LAMINAR:
        one = -1
        for i in range(k):
            if z[i] == 1:
                if one >= 0:
                    return False
                one = i
        if one < 0:
            return False
        return well_indexed_suffix(z, one + 1, k)
    if code == LANG_BASIC:
        one = -1
        for i in range(k):
            if z[i] == 1:
                one = i
                break
        if one < 0:
            return False
        for i in range(one + 1, k):
            if z[i] <= 2:
                return False
        return True
    if code == LANG_GENERATION:
        ones = 0
        last = 0
        seen_one = False
        for i in range(k):
            v = z[i]
            if v > 3:
                continue
            if v == 1:
                ones += 1
                seen_one = True
                last = 0
            elif seen_one:
                last = v
        return ones == 1 and last != 2
    # forbidden(q): restriction to [q] is x1 with x free of 1
    ones = 0
    last = 0
    for i in range(k):
        v = z[i]
        if v <= q:
            last = v
            if v == 1:
                ones += 1
    return ones == 1 and last == 1


@kernel
def lang_mc(code, r, q, lam, seed, t0, samples):
    """Membership count over Poisson(lam)-length uniform words on [r]."""
    buf = np.empty(64, np.int64)
    hit = 0
    for s in range(samples):
        key = stream_key(seed, t0 + s)
        k = poisson(key, 0, lam)
        if k > buf.shape[0]:
            buf = np.empty(2 * k, np.int64)
        for i in range(k):
            buf[i] = 1 + int(uniform(key, 1 + i) * r)
        if in_lang(code, buf, k, r, q):
            hit += 1
    return hit


@kernel
def good_word_mc(m, r, seed, t0, samples):
    """Count uniform y in [r]^m satisfying (wi)."""
    y = np.empty(max(m, 1), np.int64)
    hit = 0
    for s in range(samples):
        key = stream_key(seed, t0 + s)
        for i in range(m):
            y[i] = 1 + int(uniform(key, i) * r)
        if well_indexed_suffix(y, 0, m):
            hit += 1
    return hit


# -- word extraction from replays --------------------------------------------

@kernel
def _opt_remove(opt_list, opt_n, x):
    for i in range(opt_n):
        if opt_list[i] == x:
            opt_list[i] = opt_list[opt_n - 1]
            return opt_n - 1
    return opt_n


@kernel
def induced_labels(m, cut, imp, leave, keys, opt_list, labels):
    """labels[k] = rank of event k's key inside OPT right after k (1-based),
    for improving k >= cut; -1 elsewhere."""
    opt_n = 0
    for k in range(m):
        labels[k] = -1
        if not imp[k]:
            continue
        if leave[k] >= 0:
            opt_n = _opt_remove(opt_list, opt_n, leave[k])
        if k >= cut:
            lab = 1
            for i in range(opt_n):
                if keys[opt_list[i]] < keys[k]:
                    lab += 1
            labels[k] = lab
        opt_list[opt_n] = k
        opt_n += 1


@kernel
def word_from_labels(m, cut, imp, labels, word):
    k_len = 0
    for k in range(m - 1, cut - 1, -1):
        if imp[k]:
            word[k_len] = labels[k]
            k_len += 1
    return k_len


@kernel
def lambda_labels(m, cut, imp, tail, head, pos, root, lam1, labels):
    """Overwrite labels of improving events before position ``pos`` (e*'s
    arrival) using the head-based rule; needs u*, v* = tail/head of e*.

    w*_s is the tail of the earliest improving arc after s with head u*,
    unless that tail is the root; the fallback w*_0 is the smallest vertex
    other than u*, v*.
    """
    us = tail[pos]
    vs = head[pos]
    w0 = 0
    while w0 == us or w0 == vs:
        w0 += 1
    nxt = -1
    for k in range(m - 1, cut - 1, -1):
        if k < pos and imp[k]:
            h = head[k]
            ws = w0
            if nxt != -1 and nxt != root:
                ws = nxt
            if h == vs:
                labels[k] = 1
            elif h == us:
                labels[k] = 2
            elif lam1 and h == ws:
                labels[k] = 3
            else:
                labels[k] = OTHER_LABEL
        if imp[k] and head[k] == us:
            nxt = tail[k]


@kernel
def verify_laminar(seed, t0, t1, n, real_rank, targets, mode, r_stream, p, algo, eps, chain,
                   chain_len, cap, pclass, estars, ckeys, lang, r, q, counts):
    """Paired trials: for every e* in ``estars`` record
    counts[j] += (word in L, e* selected, forward violation, converse violation,
    first-1 mismatch)."""
    dcap = 64 + 8 * n
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
    keys = np.empty(ncap, np.int64)
    labels = np.empty(ncap, np.int64)
    word = np.empty(ncap, np.int64)
    opt_buf = np.empty(ncap + 1, np.int64)
    setcnt = np.empty(cap.shape[0], np.int64)
    algcnt = np.empty(cap.shape[0], np.int64)
    rmax = n + targets.shape[0] + 1
    opt_list = np.empty(rmax, np.int64)
    opt_cut = np.empty(rmax, np.int64)
    big = np.int64(1) << np.int64(32)
    for trial in range(t0, t1):
        key = stream_key(seed, trial)
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
            sel = np.empty(ncap, np.bool_)
            keys = np.empty(ncap, np.int64)
            labels = np.empty(ncap, np.int64)
            word = np.empty(ncap, np.int64)
            opt_buf = np.empty(ncap + 1, np.int64)
        if st < 0:
            return st
        st, _ = run_laminar(algo, coin, eps, m, cut, ev_tm, ev_rank, chain, chain_len, cap,
                            pclass, imp, leave, setcnt, opt_list, opt_cut, algcnt, sel)
        if st < 0:
            return st
        for j in range(estars.shape[0]):
            es = estars[j]
            for k in range(m):
                if ev_id[k] == es:
                    keys[k] = 0
                else:
                    keys[k] = 1 + ckeys[j, ev_tm[k]] * big + ev_id[k]
            induced_labels(m, cut, imp, leave, keys, opt_buf, labels)
            klen = word_from_labels(m, cut, imp, labels, word)
            ok = in_lang(lang, word, klen, r, q)
            ps = pos_real[es]
            s = sel[ps]
            has1 = False
            first1 = -1
            for i in range(klen):
                if word[i] == 1:
                    has1 = True
                    first1 = i
                    break
            # the first 1 of the word must be e* itself, present iff t* >= p
            lem6 = has1 != (ps >= cut)
            if has1:
                cnt_after = 0
                for k in range(m - 1, ps, -1):
                    if imp[k] and k >= cut:
                        cnt_after += 1
                if cnt_after != first1:
                    lem6 = True
            if ok:
                counts[j, 0] += 1
            if s:
                counts[j, 1] += 1
            if ok and not s:
                counts[j, 2] += 1
            if s and not ok:
                counts[j, 3] += 1
            if lem6:
                counts[j, 4] += 1
    return 0


@kernel
def verify_graphic(seed, t0, t1, n, real_rank, targets, mode, p, algo, eps, ea, eb, nv1,
                   estars, scheme, lang, r, q, counts):
    dcap = 64 + 8 * nv1
    ncap = n + dcap
    root = nv1 - 1
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
    keys = np.empty(ncap, np.int64)
    labels = np.empty(ncap, np.int64)
    word = np.empty(ncap, np.int64)
    opt_buf = np.empty(ncap + 1, np.int64)
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
    lam1 = scheme == SCHEME_LAMBDA1
    for trial in range(t0, t1):
        key = stream_key(seed, trial)
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
            sel = np.empty(ncap, np.bool_)
            gen_out = np.empty(ncap, np.int64)
            keys = np.empty(ncap, np.int64)
            labels = np.empty(ncap, np.int64)
            word = np.empty(ncap, np.int64)
            opt_buf = np.empty(ncap + 1, np.int64)
        if st < 0:
            return st
        st, _ = run_graphic(algo, coin, eps, m, cut, ev_id, ev_tm, ev_dum, ev_rank, ea, eb, nv1,
                            parent, pe, mark, imp, leave, tail, head, cut_parent, snap_parent,
                            snap_pe, uf, in_arc, gen_in, tail_in, tdeg_in, sel, gen_out)
        if st < 0:
            return st
        for j in range(estars.shape[0]):
            es = estars[j]
            ps = pos_real[es]
            if not imp[ps]:
                return -4
            for k in range(m):
                keys[k] = 0 if ev_id[k] == es else 1 + ev_id[k]
            induced_labels(m, cut, imp, leave, keys, opt_buf, labels)
            lambda_labels(m, cut, imp, tail, head, ps, root, lam1, labels)
            klen = word_from_labels(m, cut, imp, labels, word)
            ok = in_lang(lang, word, klen, r, q)
            s = sel[ps]
            if ok:
                counts[j, 0] += 1
            if s:
                counts[j, 1] += 1
            if ok and not s:
                counts[j, 2] += 1
            if s and not ok:
                counts[j, 3] += 1
    return 0
