"""Replay and algorithms for laminar-type matroids (uniform, laminar, rank-2).

An event's template ``tm`` selects its chain of constraint sets: a real
element is its own template, a dummy copy borrows the chain of its target.
"""
from .._jit import kernel


@kernel
def replay(m, ev_tm, ev_rank, chain, chain_len, cap, cut, imp, leave,
           setcnt, opt_list, opt_cut):
    """Maintain OPT of the arrived prefix; mark improving events.

    ``leave[k]`` is the event that drops out when event k enters (or -1).
    OPT at the cut (before event ``cut``) is copied into ``opt_cut``.
    Returns ``(final size, size at cut)``.
    """
    for s in range(cap.shape[0]):
        setcnt[s] = 0
    opt_n = 0
    cut_n = -1
    for k in range(m):
        if k == cut:
            for i in range(opt_n):
                opt_cut[i] = opt_list[i]
            cut_n = opt_n
        tm = ev_tm[k]
        ln = chain_len[tm]
        tight = -1
        for d in range(ln):
            s = chain[tm, d]
            if setcnt[s] >= cap[s]:
                tight = s
                break
        leave[k] = -1
        if tight < 0:
            imp[k] = True
            opt_list[opt_n] = k
            opt_n += 1
            for d in range(ln):
                setcnt[chain[tm, d]] += 1
            continue
        # the circuit is (OPT & tight) + k; its worst member may leave
        worst = -1
        wr = -1
        wi = -1
        for i in range(opt_n):
            y = opt_list[i]
            ty = ev_tm[y]
            for d in range(chain_len[ty]):
                if chain[ty, d] == tight:
                    if ev_rank[y] > wr:
                        wr = ev_rank[y]
                        worst = y
                        wi = i
                    break
        if ev_rank[k] < wr:
            imp[k] = True
            leave[k] = worst
            ty = ev_tm[worst]
            for d in range(chain_len[ty]):
                setcnt[chain[ty, d]] -= 1
            for d in range(ln):
                setcnt[chain[tm, d]] += 1
            opt_list[wi] = k
        else:
            imp[k] = False
    if cut_n < 0:
        for i in range(opt_n):
            opt_cut[i] = opt_list[i]
        cut_n = opt_n
    return opt_n, cut_n


@kernel
def greedy(m, cut, ev_tm, imp, chain, chain_len, cap, algcnt, sel):
    """Greedy-improving: keep improving arrivals after the cut while feasible."""
    for s in range(cap.shape[0]):
        algcnt[s] = 0
    for k in range(m):
        sel[k] = False
    for k in range(cut, m):
        if not imp[k]:
            continue
        tm = ev_tm[k]
        ok = True
        for d in range(chain_len[tm]):
            s = chain[tm, d]
            if algcnt[s] >= cap[s]:
                ok = False
                break
        if ok:
            sel[k] = True
            for d in range(chain_len[tm]):
                algcnt[chain[tm, d]] += 1


@kernel
def partition(m, cut, ev_tm, ev_rank, imp, pclass, opt_cut, cut_n, sel):
    """Oblivious partition for rank 2.  Returns -1 when OPT at the cut has
    fewer than two elements."""
    for k in range(m):
        sel[k] = False
    if cut_n < 2:
        return -1
    g1 = opt_cut[0]
    for i in range(1, cut_n):
        if ev_rank[opt_cut[i]] < ev_rank[g1]:
            g1 = opt_cut[i]
    c1 = pclass[ev_tm[g1]]
    got_in = False
    got_out = False
    for k in range(cut, m):
        if not imp[k]:
            continue
        par = c1 >= 0 and pclass[ev_tm[k]] == c1
        if par:
            if not got_in:
                sel[k] = True
                got_in = True
        elif not got_out:
            sel[k] = True
            got_out = True
    return 0
