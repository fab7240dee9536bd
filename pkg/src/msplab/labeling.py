"""Labeling schemes, improving words and the language checks built on them.

A word lists the labels of the improving elements of an interval, latest
arrival first.  Four schemes are supported:

* ``induced``  relative rank inside the current optimum under a fixed order;
* ``chain``    the induced scheme of a chain order w.r.t. e* (laminar);
* ``lambda0``  graphic: 1 for the arc into head(e*), 2 for the arc into
  tail(e*) before e* arrives;
* ``lambda1``  lambda0 plus label 3 for the arc into w*_s.

Labels the languages never read are handed out by ascending element id.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import algorithms as A
from .arrivals import ImprovingTrace, code_for, resolve_mode
from .kernels import words as W
from .kernels.drivers import ERR_SAFETY
from .matroids import MatroidInstance, laminar_code

LANGS = {"uniform": W.LANG_UNIFORM, "laminar": W.LANG_LAMINAR, "basic": W.LANG_BASIC,
         "generation": W.LANG_GENERATION, "forbidden": W.LANG_FORBIDDEN}
SCHEMES = ("induced", "chain", "lambda0", "lambda1")

# the only (algorithm, scheme, language) combinations that carry a proven implication
PAIRINGS = {
    ("greedy", "induced", "uniform"): ("uniform",),
    ("greedy", "chain", "laminar"): ("uniform", "laminar", "rank2"),
    ("basic", "lambda0", "basic"): ("graphic",),
    ("generation", "lambda1", "generation"): ("graphic",),
}


@dataclass(frozen=True)
class Language:
    kind: str
    r: int = 0          # alphabet size for the ranked languages
    q: int = 1          # forbidden-set size

    def __post_init__(self):
        if self.kind not in LANGS:
            raise ValueError(f"unknown language {self.kind!r}")
        if self.kind in ("uniform", "laminar") and self.r < 1:
            raise ValueError(f"{self.kind} language needs r >= 1")
        if self.kind == "forbidden" and self.q < 1:
            raise ValueError("forbidden language needs q >= 1")


def in_language(word, lang: Language) -> bool:
    z = np.asarray(list(word), dtype=np.int64)
    if z.size and z.min() < 1:
        raise ValueError("symbols must be positive integers")
    if lang.r and z.size and z.max() > lang.r:
        raise ValueError(f"symbol {int(z.max())} outside the alphabet [1, {lang.r}]")
    return bool(W.in_lang(LANGS[lang.kind], z, len(z), lang.r, lang.q))


def format_word(word, r: int) -> str:
    """Word dump: concatenated digits, comma separated once r > 9."""
    sep = "," if r > 9 else ""
    return sep.join(str(int(s)) for s in word)


@dataclass(frozen=True)
class ImprovingWord:
    symbols: tuple[int, ...]
    a: float
    b: float
    r: int

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return format_word(self.symbols, self.r)


# -- orders and schemes ------------------------------------------------------

def _chain_levels(inst: MatroidInstance, estar: int) -> np.ndarray:
    """level[x] = index of the smallest set of e*'s chain containing x, for
    the family used by the kernels (cap-1 classes added for B0 elements)."""
    pin = () if inst.kind == "uniform" else tuple(int(x) for x in inst.opt)
    chain, chain_len, _, _ = laminar_code(inst, pin)
    mine = list(chain[estar, : chain_len[estar]])
    where = {s: i for i, s in enumerate(mine)}
    top = len(mine)
    lev = np.full(inst.n, top, dtype=np.int64)
    for x in range(inst.n):
        for s in chain[x, : chain_len[x]]:
            if int(s) in where:
                lev[x] = where[int(s)]
                break
    return lev


def chain_order(inst: MatroidInstance, estar: int) -> tuple[int, ...]:
    """e* first, then by the smallest chain set containing the element, then id."""
    if inst.kind == "graphic":
        raise ValueError("chain orders are defined for laminar-type instances")
    if estar not in inst.opt:
        raise ValueError(f"element {estar} is not in OPT(E)")
    lev = _chain_levels(inst, estar)
    rest = sorted((x for x in range(inst.n) if x != estar), key=lambda x: (lev[x], x))
    return (estar, *rest)


@dataclass(frozen=True)
class LabelScheme:
    kind: str
    estar: int | None = None
    order: tuple[int, ...] | None = None       # induced: total order on real ids
    levels: tuple[int, ...] | None = None      # chain: per-element chain level
    reverse_ties: bool = False                 # lambda: free labels by descending id

    @classmethod
    def induced(cls, order, estar: int | None = None) -> "LabelScheme":
        order = tuple(int(x) for x in order)
        if estar is not None and order[0] != estar:
            raise ValueError("e* must come first in the order")
        return cls("induced", estar if estar is not None else order[0], order)

    @classmethod
    def chain(cls, inst: MatroidInstance, estar: int) -> "LabelScheme":
        if estar not in inst.opt:
            raise ValueError(f"element {estar} is not in OPT(E)")
        return cls("chain", estar, levels=tuple(int(v) for v in _chain_levels(inst, estar)))

    @classmethod
    def lambda0(cls, estar: int, reverse_ties: bool = False) -> "LabelScheme":
        return cls("lambda0", estar, reverse_ties=reverse_ties)

    @classmethod
    def lambda1(cls, estar: int, reverse_ties: bool = False) -> "LabelScheme":
        return cls("lambda1", estar, reverse_ties=reverse_ties)


def _template(trace: ImprovingTrace, x: int) -> int:
    aug = trace.aug
    if aug is None or x < aug.base.n:
        return x
    return aug.dummies[x - aug.base.n].target


def _induced_key(trace: ImprovingTrace, scheme: LabelScheme):
    if scheme.kind == "induced":
        pos = {e: i for i, e in enumerate(scheme.order)}
        big = len(pos)

        def key(x):
            if x in pos:
                return (pos[x], 0)
            if trace.aug is None:
                raise ValueError(f"element {x} missing from the order")
            return (big, trace.aug.dummies[x - trace.aug.base.n].rank)
        return key
    lev = scheme.levels
    uniform = trace.aug is not None and trace.aug.base.kind == "uniform"

    def key(x):
        if x == scheme.estar:
            return (0, 0, 0)
        return (1, 0 if uniform else lev[_template(trace, x)], x)
    return key


def _lambda_labels(trace: ImprovingTrace, scheme: LabelScheme, recs) -> dict[int, int]:
    """Labels at improving times before t*, keyed by record index."""
    es = scheme.estar
    idx_star = next((i for i, r in enumerate(recs) if r.elem == es), None)
    if idx_star is None:
        raise ValueError("e* never arrives as an improving element")
    us, vs = recs[idx_star].arc
    root = trace.aug.root
    w0 = min(v for v in range(trace.aug.base.vertices) if v not in (us, vs))
    out = {}
    nxt = None
    for i in range(len(recs) - 1, -1, -1):
        rec = recs[i]
        if i < idx_star:
            ws = nxt if nxt is not None and nxt != root else w0
            pinned = {vs: 1, us: 2}
            if scheme.kind == "lambda1":
                pinned[ws] = 3
            heads = {elem: v for v, (_, elem) in rec.arborescence.items()}
            fixed = {}
            for elem, h in heads.items():
                if h in pinned:
                    fixed[elem] = pinned[h]
            free = sorted((e for e in heads if e not in fixed), reverse=scheme.reverse_ties)
            spare = [lab for lab in range(1, len(heads) + 1) if lab not in fixed.values()]
            fixed.update(zip(free, spare))
            out[i] = fixed[rec.elem]
        if rec.arc[1] == us:
            nxt = rec.arc[0]
    return out


def improving_word(trace: ImprovingTrace, scheme: LabelScheme, a: float, b: float) -> ImprovingWord:
    if not 0.0 <= a < b <= 1.0:
        raise ValueError("need 0 <= a < b <= 1")
    recs = trace.records
    key = _induced_key(trace, scheme) if scheme.kind in ("induced", "chain") else None
    lam = {}
    if scheme.kind in ("lambda0", "lambda1"):
        if trace.aug is None or trace.aug.base.kind != "graphic" or recs and recs[0].arc is None:
            raise ValueError("lambda schemes need an augmented graphic trace")
        lam = _lambda_labels(trace, scheme, recs)
        es = scheme.estar
        key = lambda x: (x != es, x)  # noqa: E731
    r = max((len(rec.opt_after) for rec in recs), default=1)
    syms = []
    for i in range(len(recs) - 1, -1, -1):
        rec = recs[i]
        if not a <= rec.time <= b:
            continue
        if i in lam:
            syms.append(lam[i])
        else:
            kx = key(rec.elem)
            syms.append(1 + sum(1 for y in rec.opt_after if key(y) < kx))
    return ImprovingWord(tuple(syms), a, b, r)


# -- paired checks -----------------------------------------------------------

def _lang_params(inst: MatroidInstance, lang: str) -> tuple[int, int]:
    if lang == "uniform":
        return inst.r, 1
    if lang == "laminar":
        return inst.rank, 1
    return (inst.vertices if inst.kind == "graphic" else inst.rank), 1


def verify_implication(inst: MatroidInstance, algorithm: str, scheme: str, lang: str,
                       estar: int | None, trials: int, seed: int, p: float,
                       mode: str = "auto") -> dict:
    """Paired trials: the same arrivals feed the algorithm and the word.

    ``violations`` counts trials with the word in the language but e* not
    selected; ``converse_violations`` the reverse (meaningful for the uniform
    pairing, which is an equivalence).  ``first_one_mismatch`` is only tracked
    for the induced/chain schemes.  ``estar=None`` checks every element of
    OPT(E) and sums the counts.
    """
    allowed = PAIRINGS.get((algorithm, scheme, lang))
    if allowed is None:
        raise ValueError(f"no implication pairs {algorithm!r} with scheme {scheme!r} and "
                         f"language {lang!r}")
    if inst.kind not in allowed:
        raise ValueError(f"pairing ({algorithm}, {scheme}, {lang}) does not apply to "
                         f"{inst.kind} instances")
    if scheme == "lambda1":
        if not inst.is_simple():
            raise ValueError("the lambda1/generation implication is only claimed for simple graphs")
        if inst.vertices < 3:
            raise ValueError("lambda1 needs at least 3 vertices")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    mode = resolve_mode(inst, mode)
    if mode == "none":
        raise ValueError("labeling needs an augmented instance")
    c = code_for(inst, mode)
    opt = list(inst.opt)
    estars = opt if estar is None else [estar]
    if any(e not in opt for e in estars):
        raise ValueError(f"element {estar} is not in OPT(E)")
    estars_a = np.array(estars, dtype=np.int64)
    r, q = _lang_params(inst, lang)
    algo = A.ALGO_CODE[algorithm]
    if c.graphic:
        counts = np.zeros((len(estars), 4), dtype=np.int64)
        sch = W.SCHEME_LAMBDA1 if scheme == "lambda1" else W.SCHEME_LAMBDA0
        st = W.verify_graphic(seed, 0, trials, inst.n, c.real_rank, c.targets, c.mode, p, algo,
                              0.0, c.ea, c.eb, c.nv1, estars_a, sch, LANGS[lang], r, q, counts)
    else:
        counts = np.zeros((len(estars), 5), dtype=np.int64)
        ckeys = np.zeros((len(estars), max(inst.n, 1)), dtype=np.int64)
        if scheme == "chain" and inst.kind != "uniform":
            for j, e in enumerate(estars):
                ckeys[j, : inst.n] = _chain_levels(inst, e)
        st = W.verify_laminar(seed, 0, trials, inst.n, c.real_rank, c.targets, c.mode,
                              c.r_stream, p, algo, 0.0, c.chain, c.chain_len, c.cap, c.pclass,
                              estars_a, ckeys, LANGS[lang], r, q, counts)
    if st == ERR_SAFETY:
        raise RuntimeError("dummy generation exceeded the safety cap")
    if st == -4:
        raise AssertionError("an optimal element was not improving at its arrival")
    if st < 0:
        raise AssertionError(f"kernel reported error code {st}")
    tot = counts.sum(axis=0)
    out = {"algorithm": algorithm, "scheme": scheme, "language": lang, "p": p, "seed": seed,
           "trials": trials, "mode": mode, "estars": [int(e) for e in estars],
           "word_in_lang": int(tot[0]), "selected": int(tot[1]),
           "violations": int(tot[2]), "converse_violations": int(tot[3])}
    if not c.graphic:
        out["first_one_mismatch"] = int(tot[4])
    out["per_element"] = {int(e): [int(v) for v in counts[j]] for j, e in enumerate(estars)}
    return out


def good_word_fraction(m: int, r: int, samples: int, seed: int) -> tuple[float, float]:
    """Fraction of uniform y in [r]^m that are well indexed, with its stderr."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if m < 0 or r < 1:
        raise ValueError("need m >= 0 and r >= 1")
    hit = W.good_word_mc(m, r, seed, 0, samples)
    f = hit / samples
    return f, float(np.sqrt(max(f * (1 - f), 1e-300) / samples))
