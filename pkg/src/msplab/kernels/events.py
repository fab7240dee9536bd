"""Arrival events: real times, augmentation dummies, time-sorted event arrays.

Stream layout for one trial key ``k``::

    uniform(k, 0)            mixture coin (always drawn)
    uniform(k, 1 + i)        arrival time of real element i
    subkey(k, 1)             single dummy stream (mode STREAM)
    subkey(k, 2 + j)         copy stream of target j (mode COPIES)

If two events collide (or a time is exactly 0) the whole trial is redrawn
from ``subkey(k, -1 - attempt)``.
"""
import numpy as np

from .._jit import kernel
from .rng import subkey, uniform

OFF = 0
STREAM = 1
COPIES = 2
PINNED = 3

SAFETY_CAP = 10_000
SMALL_SORT = 24


@kernel
def gen_dummies(key, mode, targets, r, p, min_copies, out_tgt, out_copy, out_t):
    """Write the dummy population; returns its size, or -1 past the safety cap.

    When the size exceeds ``len(out_t)`` nothing beyond the buffer is written
    and the caller must retry with larger buffers.
    """
    cap = out_t.shape[0]
    nt = targets.shape[0]
    cnt = 0
    if mode == STREAM:
        sk = subkey(key, 1)
        landed = 0
        j = 0
        while landed < r or j < min_copies:
            if j >= SAFETY_CAP * max(r, 1):
                return -1
            t = uniform(sk, j)
            if cnt < cap:
                out_tgt[cnt] = 0
                out_copy[cnt] = j
                out_t[cnt] = t
            cnt += 1
            if t < p:
                landed += 1
            j += 1
    elif mode == COPIES:
        for i in range(nt):
            sk = subkey(key, 2 + i)
            c = 0
            while True:
                if c >= SAFETY_CAP:
                    return -1
                t = uniform(sk, c)
                if cnt < cap:
                    out_tgt[cnt] = i
                    out_copy[cnt] = c
                    out_t[cnt] = t
                cnt += 1
                c += 1
                if t < p and c >= min_copies:
                    break
    elif mode == PINNED:
        for i in range(nt):
            if cnt < cap:
                out_tgt[cnt] = i
                out_copy[cnt] = 0
                out_t[cnt] = -1.0 + 0.5 * (i + 1) / (nt + 1)
            cnt += 1
    return cnt


@kernel
def draw_real_times(key, n, out):
    for i in range(n):
        out[i] = uniform(key, 1 + i)


@kernel
def sort_order(t, m, order):
    """order[:m] = argsort(t[:m]); insertion sort for short inputs."""
    if m <= SMALL_SORT:
        for i in range(m):
            order[i] = i
        for i in range(1, m):
            j = i
            cur = order[i]
            tc = t[cur]
            while j > 0 and t[order[j - 1]] > tc:
                order[j] = order[j - 1]
                j -= 1
            order[j] = cur
    else:
        o = np.argsort(t[:m])
        for i in range(m):
            order[i] = o[i]


@kernel
def assemble(n, real_t, real_rank, nd, d_tgt, d_copy, d_t, targets, mode,
             order, ev_id, ev_tm, ev_rank, ev_dum, ev_t, pos_real, p):
    """Merge reals and dummies into time-sorted event arrays.

    Returns ``(cut, ok)``: the number of events before ``p`` and whether all
    times are valid and distinct.  Dummy ids are ``n + k`` in generation
    order; their template is the target they copy.
    """
    m = n + nd
    nt = targets.shape[0]
    tmp = np.empty(m)
    for i in range(n):
        tmp[i] = real_t[i]
    for k in range(nd):
        tmp[n + k] = d_t[k]
    sort_order(tmp, m, order)
    ok = True
    cut = 0
    prev = -2.0
    for s in range(m):
        j = order[s]
        t = tmp[j]
        if j < n:
            if t <= 0.0:
                ok = False
            ev_id[s] = j
            ev_tm[s] = j
            ev_rank[s] = real_rank[j]
            ev_dum[s] = False
            pos_real[j] = s
        else:
            k = j - n
            ev_id[s] = j
            ev_tm[s] = targets[d_tgt[k]]
            if mode == STREAM or mode == PINNED:
                ev_rank[s] = n + k
            else:
                ev_rank[s] = n + d_copy[k] * nt + d_tgt[k]
            ev_dum[s] = True
        if t == prev:
            ok = False
        prev = t
        ev_t[s] = t
        if t < p:
            cut += 1
    return cut, ok
