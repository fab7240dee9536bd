"""Replay and algorithms for graphic matroids.

The optimum forest is kept as parent pointers rooted at ``w = nv1 - 1``
(the augmentation root).  ``pe[v]`` is the event carrying the arc into v.
An improving edge either joins two components or swaps out the worst edge
of the cycle it closes; the detached side is rerooted by reversing the
parent pointers along one path.
"""
from .._jit import kernel


@kernel
def _reroot(start, stop, parent, pe):
    # reverse the path start -> ... -> stop; the edge above stop is dropped
    prev = -1
    prev_e = -1
    x = start
    while True:
        nxt = parent[x]
        ne = pe[x]
        parent[x] = prev
        pe[x] = prev_e
        if x == stop:
            break
        prev = x
        prev_e = ne
        x = nxt


@kernel
def endpoints(k, ev_id, ev_tm, ev_dum, ea, eb, root):
    if ev_dum[k]:
        return root, ev_tm[k]
    e = ev_id[k]
    return ea[e], eb[e]


@kernel
def replay(m, ev_id, ev_tm, ev_dum, ev_rank, ea, eb, nv1, cut, parent, pe, mark,
           imp, leave, tail, head, cut_parent, snap_parent, snap_pe):
    """Greedy swap replay with canonical orientation of improving arcs.

    ``tail[k], head[k]`` is the orientation of an improving event k in the
    arborescence right after it arrives.  The parent array at the cut is
    copied to ``cut_parent``.  Snapshot arrays with zero rows are ignored.
    """
    root = nv1 - 1
    snap = snap_parent.shape[0] > 0
    for v in range(nv1):
        parent[v] = -1
        pe[v] = -1
        mark[v] = 0
    stamp = 0
    for k in range(m + 1):
        if k == cut:
            for v in range(nv1):
                cut_parent[v] = parent[v]
        if k == m:
            break
        a, b = endpoints(k, ev_id, ev_tm, ev_dum, ea, eb, root)
        imp[k] = False
        leave[k] = -1
        tail[k] = -1
        head[k] = -1
        stamp += 1
        x = a
        ra = a
        while x != -1:
            mark[x] = stamp
            ra = x
            x = parent[x]
        y = b
        rb = b
        while y != -1 and mark[y] != stamp:
            rb = y
            y = parent[y]
        if y == -1:
            # joins two components; the one without the root is rerooted
            imp[k] = True
            if rb == root:
                _reroot(a, ra, parent, pe)
                parent[a] = b
                pe[a] = k
                tail[k] = b
                head[k] = a
            else:
                _reroot(b, rb, parent, pe)
                parent[b] = a
                pe[b] = k
                tail[k] = a
                head[k] = b
        else:
            lca = y
            wr = -1
            wv = -1
            side = 0
            x = a
            while x != lca:
                r = ev_rank[pe[x]]
                if r > wr:
                    wr = r
                    wv = x
                    side = 0
                x = parent[x]
            x = b
            while x != lca:
                r = ev_rank[pe[x]]
                if r > wr:
                    wr = r
                    wv = x
                    side = 1
                x = parent[x]
            if wv >= 0 and ev_rank[k] < wr:
                imp[k] = True
                leave[k] = pe[wv]
                if side == 0:
                    _reroot(a, wv, parent, pe)
                    parent[a] = b
                    pe[a] = k
                    tail[k] = b
                    head[k] = a
                else:
                    _reroot(b, wv, parent, pe)
                    parent[b] = a
                    pe[b] = k
                    tail[k] = a
                    head[k] = b
        if snap and imp[k]:
            for v in range(nv1):
                snap_parent[k, v] = parent[v]
                snap_pe[k, v] = pe[v]


@kernel
def uf_find(uf, x):
    while uf[x] != x:
        uf[x] = uf[uf[x]]
        x = uf[x]
    return x


@kernel
def greedy(m, cut, ev_id, ev_tm, ev_dum, imp, ea, eb, nv1, uf, sel):
    root = nv1 - 1
    for v in range(nv1):
        uf[v] = v
    for k in range(m):
        sel[k] = False
    for k in range(cut, m):
        if not imp[k]:
            continue
        a, b = endpoints(k, ev_id, ev_tm, ev_dum, ea, eb, root)
        ra = uf_find(uf, a)
        rb = uf_find(uf, b)
        if ra != rb:
            uf[ra] = rb
            sel[k] = True


@kernel
def aux_run(m, cut, ev_dum, imp, tail, head, nv1, generation, in_arc, gen_in,
            tail_in, tdeg_in, sel, gen_out):
    """Build AUX after the cut; Basic (generation=False) or Generation.

    Both characterizations are evaluated: Basic's tail-in-degree rule against
    Gen == 0, Generation's branch conditions against Gen != 1.  Returns -2 on
    any disagreement, 0 otherwise.
    """
    root = nv1 - 1
    for v in range(nv1):
        in_arc[v] = -1
    for k in range(m):
        sel[k] = False
        gen_out[k] = -1
    for k in range(cut, m):
        if not imp[k]:
            continue
        u = tail[k]
        v = head[k]
        if in_arc[v] != -1:
            continue
        du = 0 if in_arc[u] == -1 else 1
        if ev_dum[k]:
            g = 1
        elif du == 0:
            g = 0
        else:
            g = gen_in[u] + 1
        in_arc[v] = k
        gen_in[v] = g
        tail_in[v] = u
        tdeg_in[v] = du
        gen_out[k] = g
        if not generation:
            sel[k] = du == 0
            if (not ev_dum[k]) and ((du == 0) != (g == 0)):
                return -2
        else:
            take = False
            if u != root:
                if du == 0:
                    take = True
                else:
                    up = tail_in[u]
                    if up == root or tdeg_in[u] == 1:
                        take = True
            if take != ((not ev_dum[k]) and g != 1):
                return -2
            sel[k] = take
    return 0


@kernel
def oblivious(m, cut, ev_id, ev_tm, ev_dum, imp, ea, eb, nv1, cut_parent, uf, sel):
    """Select improving copies of the tree edges at the cut, keeping a forest."""
    root = nv1 - 1
    for v in range(nv1):
        uf[v] = v
    for k in range(m):
        sel[k] = False
    for k in range(cut, m):
        if not imp[k]:
            continue
        a, b = endpoints(k, ev_id, ev_tm, ev_dum, ea, eb, root)
        if cut_parent[a] != b and cut_parent[b] != a:
            continue
        ra = uf_find(uf, a)
        rb = uf_find(uf, b)
        if ra != rb:
            uf[ra] = rb
            sel[k] = True
