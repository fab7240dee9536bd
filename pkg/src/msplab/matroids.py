"""Matroid instances and their independence / rank / optimum oracles.

Four structural kinds are supported: ``uniform``, ``laminar``, ``rank2`` and
``graphic``.  Elements are the integers ``0..n-1``; the value order lists them
from best to worst.  Augmentation dummies never live on a ``MatroidInstance``
(see :mod:`msplab.arrivals`), they get ids ``>= n``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

KINDS = ("uniform", "laminar", "rank2", "graphic")


class UnionFind:
    """Disjoint sets with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def order_from_weights(weights: Sequence[float]) -> tuple[int, ...]:
    """Value order from weights; ties go to the lower id."""
    return tuple(sorted(range(len(weights)), key=lambda i: (-weights[i], i)))


@dataclass(frozen=True, eq=False)
class MatroidInstance:
    kind: str
    n: int
    order: tuple[int, ...]
    r: int | None = None
    sets: tuple[tuple[tuple[int, ...], int], ...] = ()
    classes: tuple[tuple[int, ...], ...] = ()
    vertices: int = 0
    edges: tuple[tuple[int, int], ...] = ()
    meta: dict = field(default_factory=dict, compare=False)

    # -- constructors -----------------------------------------------------
    @classmethod
    def uniform(cls, n: int, r: int, order=None) -> "MatroidInstance":
        return cls("uniform", n, _order(order, n), r=r)

    @classmethod
    def laminar(cls, n: int, sets, order=None) -> "MatroidInstance":
        norm = tuple((tuple(sorted(int(x) for x in mem)), int(cap)) for mem, cap in sets)
        return cls("laminar", n, _order(order, n), sets=norm)

    @classmethod
    def rank2(cls, classes, order=None) -> "MatroidInstance":
        cl = tuple(tuple(sorted(int(x) for x in c)) for c in classes)
        n = sum(len(c) for c in cl)
        return cls("rank2", n, _order(order, n), classes=cl)

    @classmethod
    def graphic(cls, vertices: int, edges, order=None) -> "MatroidInstance":
        ed = tuple((int(u), int(v)) for u, v in edges)
        return cls("graphic", len(ed), _order(order, len(ed)), vertices=vertices, edges=ed)

    def with_order(self, order) -> "MatroidInstance":
        return MatroidInstance(self.kind, self.n, tuple(order), self.r, self.sets,
                               self.classes, self.vertices, self.edges, dict(self.meta))

    # -- derived data -----------------------------------------------------
    @cached_property
    def position(self) -> np.ndarray:
        """position[e] = index of e in the value order (0 = best)."""
        pos = np.full(self.n, -1, dtype=np.int64)
        for i, e in enumerate(self.order):
            if 0 <= e < self.n:
                pos[e] = i
        return pos

    @cached_property
    def lam_sets(self) -> tuple[tuple[frozenset, int], ...]:
        """The constraint family seen as a laminar family (not for graphic)."""
        if self.kind == "uniform":
            return ((frozenset(range(self.n)), int(self.r)),)
        if self.kind == "laminar":
            return tuple((frozenset(m), c) for m, c in self.sets)
        if self.kind == "rank2":
            fam = [(frozenset(c), 1) for c in self.classes]
            fam.append((frozenset(range(self.n)), min(2, len(self.classes))))
            return tuple(fam)
        raise ValueError("graphic instances have no laminar form")

    @cached_property
    def opt(self) -> tuple[int, ...]:
        """OPT(E) in value order."""
        return tuple(opt_greedy(self, range(self.n)))

    @property
    def rank(self) -> int:
        return len(self.opt)

    def is_simple(self) -> bool:
        if self.kind != "graphic":
            return True
        seen = set()
        for u, v in self.edges:
            key = (min(u, v), max(u, v))
            if key in seen:
                return False
            seen.add(key)
        return True

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        d = {"kind": self.kind, "n": self.n, "order": list(self.order)}
        if self.kind == "uniform":
            d["r"] = self.r
        elif self.kind == "laminar":
            d["sets"] = [{"members": list(m), "cap": c} for m, c in self.sets]
        elif self.kind == "rank2":
            d["classes"] = [list(c) for c in self.classes]
        else:
            d["vertices"] = self.vertices
            d["edges"] = [list(e) for e in self.edges]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MatroidInstance":
        kind = d.get("kind")
        if kind not in KINDS:
            raise ValueError(f"unknown matroid kind {kind!r}")
        order = d.get("order")
        if kind == "uniform":
            inst = cls.uniform(int(d["n"]), int(d["r"]), order)
        elif kind == "laminar":
            inst = cls.laminar(int(d["n"]), [(s["members"], s["cap"]) for s in d["sets"]], order)
        elif kind == "rank2":
            inst = cls.rank2(d["classes"], order)
        else:
            inst = cls.graphic(int(d["vertices"]), d["edges"], order)
        if "n" in d and int(d["n"]) != inst.n:
            raise ValueError(f"n={d['n']} does not match the structural payload ({inst.n})")
        return inst

    def dumps(self) -> str:
        return json.dumps(self.to_dict())


def _order(order, n: int) -> tuple[int, ...]:
    return tuple(range(n)) if order is None else tuple(int(x) for x in order)


# -- oracles --------------------------------------------------------------

def _check_ids(inst: MatroidInstance, s: Iterable[int]) -> list[int]:
    out = []
    for x in s:
        x = int(x)
        if not 0 <= x < inst.n:
            raise ValueError(f"element id {x} outside 0..{inst.n - 1}")
        out.append(x)
    if len(set(out)) != len(out):
        raise ValueError("element set contains duplicates")
    return out


class _Builder:
    """Incremental independence test used by the greedy scans."""

    def __init__(self, inst: MatroidInstance):
        self.inst = inst
        if inst.kind == "graphic":
            self.uf = UnionFind(max(inst.vertices, 1))
        else:
            self.fam = inst.lam_sets
            self.cnt = [0] * len(self.fam)

    def try_add(self, x: int) -> bool:
        inst = self.inst
        if inst.kind == "graphic":
            u, v = inst.edges[x]
            return u != v and self.uf.union(u, v)
        hit = [i for i, (mem, _) in enumerate(self.fam) if x in mem]
        if any(self.cnt[i] >= self.fam[i][1] for i in hit):
            return False
        for i in hit:
            self.cnt[i] += 1
        return True


def is_independent(inst: MatroidInstance, s: Iterable[int]) -> bool:
    b = _Builder(inst)
    return all(b.try_add(x) for x in _check_ids(inst, s))


def opt_greedy(inst: MatroidInstance, s: Iterable[int]) -> list[int]:
    """OPT(s): scan s best-first, keep what stays independent."""
    items = sorted(_check_ids(inst, s), key=lambda x: inst.position[x])
    b = _Builder(inst)
    return [x for x in items if b.try_add(x)]


def rank_of(inst: MatroidInstance, s: Iterable[int]) -> int:
    return len(opt_greedy(inst, s))


def is_improving(inst: MatroidInstance, arrived: Iterable[int], e: int) -> bool:
    arrived = _check_ids(inst, arrived)
    (e,) = _check_ids(inst, [e])
    if e in arrived:
        raise ValueError(f"element {e} already arrived")
    return e in opt_greedy(inst, arrived + [e])


def are_parallel(inst: MatroidInstance, e: int, f: int) -> bool:
    if e == f:
        raise ValueError("parallelism needs two distinct elements")
    e, f = _check_ids(inst, [e, f])
    if inst.kind == "rank2":
        return any(e in c and f in c for c in inst.classes)
    if inst.kind == "graphic":
        a, b = inst.edges[e], inst.edges[f]
        return {a[0], a[1]} == {b[0], b[1]}
    return rank_of(inst, [e, f]) == 1


def _is_laminar(fam) -> list[str]:
    bad = []
    for (i, (a, _)), (j, (b, _)) in combinations(enumerate(fam), 2):
        if a & b and not (a <= b or b <= a):
            bad.append(f"sets {i} and {j} cross")
    return bad


def validate_instance(inst: MatroidInstance, axioms: bool = True) -> list[str]:
    """List of invariant violations (empty when the instance is well formed).

    With ``axioms`` and n <= 10 the independence axioms are also checked by
    exhaustive enumeration.
    """
    out = []
    if inst.kind not in KINDS:
        return [f"unknown kind {inst.kind!r}"]
    if sorted(inst.order) != list(range(inst.n)):
        out.append("order is not a permutation of 0..n-1")
    if inst.kind == "uniform":
        if inst.r is None or inst.r < 1:
            out.append("uniform rank must be >= 1")
    elif inst.kind == "laminar":
        for i, (mem, cap) in enumerate(inst.sets):
            if cap < 1:
                out.append(f"set {i} has cap {cap} < 1")
            if any(not 0 <= x < inst.n for x in mem):
                out.append(f"set {i} has invalid members")
            if len(set(mem)) != len(mem):
                out.append(f"set {i} repeats members")
        out += _is_laminar([(frozenset(m), c) for m, c in inst.sets])
    elif inst.kind == "rank2":
        flat = [x for c in inst.classes for x in c]
        if sorted(flat) != list(range(inst.n)):
            out.append("rank-2 classes do not partition the ground set")
        if any(len(c) == 0 for c in inst.classes):
            out.append("empty rank-2 class")
    else:
        for i, (u, v) in enumerate(inst.edges):
            if not (0 <= u < inst.vertices and 0 <= v < inst.vertices):
                out.append(f"edge {i} references an invalid vertex")
            elif u == v:
                out.append(f"edge {i} is a loop")
    if out:
        return out
    if inst.n == 0 or rank_of(inst, range(inst.n)) < 1:
        out.append("instance rank must be >= 1")
    if inst.kind != "graphic":
        loops = [x for x in range(inst.n) if not is_independent(inst, [x])]
        if loops:
            out.append(f"loops present: {loops}")
    if axioms and inst.n <= 10 and not out:
        out += check_axioms(inst)
    return out


def independent_sets(inst: MatroidInstance, ground: Sequence[int] | None = None) -> list[frozenset]:
    ground = list(range(inst.n)) if ground is None else list(ground)
    res = []
    for k in range(len(ground) + 1):
        for c in combinations(ground, k):
            if is_independent(inst, c):
                res.append(frozenset(c))
    return res


def check_axioms(inst: MatroidInstance, ground: Sequence[int] | None = None) -> list[str]:
    """Exhaustive check of (I1)-(I3) on the subsets of ``ground``."""
    ind = independent_sets(inst, ground)
    fam = set(ind)
    out = []
    if frozenset() not in fam:
        out.append("(I1) empty set is dependent")
    for s in ind:
        for x in s:
            if s - {x} not in fam:
                out.append(f"(I2) {sorted(s)} independent but {sorted(s - {x})} is not")
                return out
    for x in ind:
        for y in ind:
            if len(x) < len(y) and not any((x | {e}) in fam for e in y - x):
                out.append(f"(I3) no exchange from {sorted(y)} into {sorted(x)}")
                return out
    return out


def brute_force_opt(inst: MatroidInstance, s: Sequence[int]) -> frozenset:
    """Lexicographically best independent subset of ``s`` by enumeration."""
    best, best_key = frozenset(), ()
    for t in independent_sets(inst, s):
        key = tuple(sorted(inst.position[x] for x in t))
        # lexicographic max w.r.t. value order = larger sets first, then better positions
        cand = (len(t), tuple(-k for k in key))
        if cand > (len(best), best_key):
            best, best_key = t, tuple(-k for k in key)
    return best


# -- array encodings for the kernels -------------------------------------

def laminar_code(inst: MatroidInstance, targets: Sequence[int] = ()):
    """Flatten the constraint family into per-element chains.

    Returns ``(chain, chain_len, cap, pclass)``.  ``chain[e]`` lists the sets
    containing e from the smallest up.  Every element of ``targets`` gets an
    extra cap-1 singleton set unless it already sits in a cap-1 set; dummy
    copies of it share its chain, which makes them parallel to it.
    ``pclass[e]`` is the largest cap-1 set of e's chain (or -1).
    """
    fam = [(set(m), c) for m, c in inst.lam_sets]
    for f in targets:
        if not any(f in m and c == 1 for m, c in fam):
            fam.append(({f}, 1))
    n = inst.n
    rows = []
    for e in range(n):
        mine = [i for i, (m, _) in enumerate(fam) if e in m]
        mine.sort(key=lambda i: (len(fam[i][0]), fam[i][1], i))
        rows.append(mine)
    depth = max([len(r) for r in rows] + [1])
    chain = np.full((max(n, 1), depth), -1, dtype=np.int64)
    chain_len = np.zeros(max(n, 1), dtype=np.int64)
    pclass = np.full(max(n, 1), -1, dtype=np.int64)
    for e, row in enumerate(rows):
        chain[e, : len(row)] = row
        chain_len[e] = len(row)
        ones = [i for i in row if fam[i][1] == 1]
        if ones:
            pclass[e] = ones[-1]
    cap = np.array([c for _, c in fam] or [1], dtype=np.int64)
    return chain, chain_len, cap, pclass


def graphic_code(inst: MatroidInstance):
    ea = np.array([u for u, _ in inst.edges], dtype=np.int64)
    eb = np.array([v for _, v in inst.edges], dtype=np.int64)
    return ea, eb
