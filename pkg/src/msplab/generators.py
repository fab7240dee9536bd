"""Instance generators: the tight laminar family and random test families."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .matroids import MatroidInstance, opt_greedy, order_from_weights


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def tight_laminar(q: int, r: int, rng) -> MatroidInstance:
    """r blocks F_1..F_r of q elements; E_i = F_1 u ... u F_i with cap i.

    Weights of F_i are uniform on [r-i, r-i+1], so every block outranks the
    next one.  ``meta["estar"]`` is the optimal element of E_1.
    """
    if q < 1 or r < 1:
        raise ValueError("need q >= 1 and r >= 1")
    rng = _rng(rng)
    n = q * r
    blocks = [list(range(i * q, (i + 1) * q)) for i in range(r)]
    while True:
        w = np.concatenate([(r - i - 1) + rng.random(q) for i in range(r)])
        if len(np.unique(w)) == n:
            break
    sets = [(sum(blocks[: i + 1], []), i + 1) for i in range(r)]
    inst = MatroidInstance.laminar(n, sets, order_from_weights(w.tolist()))
    inst.meta.update(family="tight-laminar", q=q, r=r, estar=inst.order[0])
    return inst


def uniform_instance(n: int, r: int) -> MatroidInstance:
    if n < 1 or not 1 <= r <= n:
        raise ValueError("need n >= 1 and 1 <= r <= n")
    inst = MatroidInstance.uniform(n, r)
    inst.meta.update(family="uniform")
    return inst


def random_rank2(class_sizes, rng) -> MatroidInstance:
    sizes = [int(s) for s in class_sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("class sizes must be positive")
    rng = _rng(rng)
    n = sum(sizes)
    ids = rng.permutation(n)
    classes, at = [], 0
    for s in sizes:
        classes.append(sorted(int(x) for x in ids[at: at + s]))
        at += s
    inst = MatroidInstance.rank2(classes, [int(x) for x in rng.permutation(n)])
    inst.meta.update(family="rank2")
    return inst


def random_laminar(n: int, depth: int, branching: int, rng) -> MatroidInstance:
    """Random laminar family over n elements.

    Each node splits about 80% of its elements into ``branching`` children,
    down to ``depth`` levels.  Caps are drawn below the node's effective
    capacity (children caps plus uncovered elements), so no set is vacuous
    unless it is a singleton.
    """
    if n < 1 or depth < 0 or branching < 1:
        raise ValueError("need n >= 1, depth >= 0, branching >= 1")
    rng = _rng(rng)
    sets: list[tuple[list[int], int]] = []

    def build(members: list[int], level: int) -> int:
        covered = child_caps = 0
        if level < depth and len(members) >= 2:
            m = rng.permutation(members)
            take = min(len(m), max(2, int(round(0.8 * len(m)))))
            k = min(branching, take)
            cuts = np.sort(rng.choice(np.arange(1, take), size=k - 1, replace=False))
            for part in np.split(m[:take], cuts):
                if len(part) < len(members):
                    child_caps += build(sorted(int(x) for x in part), level + 1)
                    covered += len(part)
        eff = child_caps + len(members) - covered
        cap = int(rng.integers(1, eff)) if eff > 1 else 1
        sets.append((sorted(members), cap))
        return cap

    build(list(range(n)), 0)
    inst = MatroidInstance.laminar(n, sets, [int(x) for x in rng.permutation(n)])
    inst.meta.update(family="random-laminar")
    return inst


def random_graph(vertices: int, edges: int, simple: bool, parallel_bias: float,
                 rng) -> MatroidInstance:
    """Connected random (multi)graph with a random value order.

    A spanning tree plus random extra edges.  With ``parallel_bias > 0`` that
    fraction of the extra edges are instead parallel copies of the optimal
    edges, spread round-robin, and slotted into the order at random positions.
    A copy only raises the value of an optimal endpoint pair, so the optimal
    pairs stay the same.
    """
    if vertices < 3:
        raise ValueError("need at least 3 vertices")
    if edges < vertices - 1:
        raise ValueError(f"{edges} edges cannot connect {vertices} vertices")
    if simple and edges > vertices * (vertices - 1) // 2:
        raise ValueError("too many edges for a simple graph")
    if not 0.0 <= parallel_bias <= 1.0:
        raise ValueError("parallel_bias must lie in [0, 1]")
    if simple and parallel_bias > 0:
        raise ValueError("a simple graph cannot carry parallel copies")
    rng = _rng(rng)
    perm = [int(x) for x in rng.permutation(vertices)]
    ed = []
    for i in range(1, vertices):
        u, v = perm[int(rng.integers(0, i))], perm[i]
        ed.append((min(u, v), max(u, v)))
    extra = edges - (vertices - 1)
    copies = int(round(parallel_bias * extra))
    plain = extra - copies
    if simple:
        used = set(ed)
        free = [pr for pr in combinations(range(vertices), 2) if pr not in used]
        pick = rng.choice(len(free), size=plain, replace=False) if plain else []
        ed += [free[int(i)] for i in pick]
    else:
        for _ in range(plain):
            u, v = rng.choice(vertices, size=2, replace=False)
            ed.append((min(int(u), int(v)), max(int(u), int(v))))
    order = [int(x) for x in rng.permutation(len(ed))]
    if copies:
        base = MatroidInstance.graphic(vertices, ed, order)
        pairs = [ed[e] for e in opt_greedy(base, range(base.n))]
        pairs = [pairs[int(i)] for i in rng.permutation(len(pairs))]
        for c in range(copies):
            ed.append(pairs[c % len(pairs)])
            order.insert(int(rng.integers(0, len(order) + 1)), len(ed) - 1)
    inst = MatroidInstance.graphic(vertices, ed, order)
    inst.meta.update(family="graph", simple=bool(simple), parallel_bias=float(parallel_bias))
    return inst


FAMILIES = ("tight-laminar", "uniform", "random-laminar", "rank2", "graph")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def build(self) -> MatroidInstance:
        k = self.params
        rng = np.random.default_rng(self.seed)
        if self.family == "tight-laminar":
            return tight_laminar(int(k["q"]), int(k["r"]), rng)
        if self.family == "uniform":
            return uniform_instance(int(k["n"]), int(k["r"]))
        if self.family == "random-laminar":
            return random_laminar(int(k["n"]), int(k.get("depth", 2)),
                                  int(k.get("branching", 2)), rng)
        if self.family == "rank2":
            return random_rank2(k["class_sizes"], rng)
        if self.family == "graph":
            return random_graph(int(k["vertices"]), int(k["edges"]), bool(k.get("simple", False)),
                                float(k.get("parallel_bias", 0.0)), rng)
        raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
