"""Command-line front end: ``msplab <subcommand> ...``.

JSON on stdout by default (``--format csv`` for spreadsheets), floats rounded
to 6 significant digits.  Exit codes: 0 ok, 1 failed check, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import analytics as an
from . import generators as gen
from . import harness as H
from .algorithms import ALGORITHMS, RunConfig
from .arrivals import MODES
from .labeling import LANGS, SCHEMES, verify_implication
from .matroids import MatroidInstance, validate_instance


class UsageError(Exception):
    pass


def _round(x):
    if isinstance(x, float):
        return float(f"{x:.6g}")
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        else:
            yield key, json.dumps(v) if isinstance(v, list) else v


def _emit(payload: dict, args, csv_text: str | None = None) -> None:
    payload = _round(payload)
    if args.format == "csv":
        if csv_text is None:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["key", "value"])
            for k, v in _flatten(payload):
                w.writerow([k, v])
            csv_text = buf.getvalue()
        text = csv_text
    else:
        text = json.dumps(payload) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> MatroidInstance:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"instance file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"instance file is not valid JSON: {exc}")
    inst = MatroidInstance.from_dict(data)
    bad = validate_instance(inst, axioms=False)
    if bad:
        raise UsageError("invalid instance: " + "; ".join(bad))
    return inst


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.cmd} is stochastic; --seed is required")


def _cfg(args) -> RunConfig:
    return RunConfig(args.p, args.eps)


# -- subcommands -------------------------------------------------------------

def cmd_simulate(args) -> int:
    _need_seed(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    inst = _load(args.instance)
    config = {"instance": args.instance, "algorithm": args.algorithm, "p": args.p,
              "eps": args.eps, "trials": args.trials, "seed": args.seed, "augment": args.augment}
    if args.augment == "both":
        reps = H.compare_modes(inst, args.algorithm, _cfg(args), args.trials, args.seed,
                               args.threads)
        out = {"config": config,
               "reports": {m: (r.to_dict() if isinstance(r, H.CompetitivenessReport) else
                               {"error": r}) for m, r in reps.items()}}
        _emit(out, args)
        return 0
    rep = H.estimate(inst, args.algorithm, _cfg(args), args.trials, args.seed, args.augment,
                     args.threads, args.min_copies)
    out = {"config": config, **rep.to_dict()}
    _emit(out, args, rep.to_csv() if args.format == "csv" else None)
    if args.assert_min is not None and rep.min_frequency < args.assert_min:
        return 1
    return 0


def _analytic_value(args):
    f = args.formula
    if f == "c":
        return an.c_uniform(args.r, args.p)
    if f == "a":
        return an.a_laminar(args.r, args.p)
    if f == "basic":
        return an.basic_bound(args.p)
    if f == "generation":
        return an.generation_bound(args.p)
    if f == "rank2-mixture":
        return an.rank2_mixture_bound(args.p, args.eps)
    if f == "graphic-mixture":
        return an.graphic_mixture_bound(args.p, args.eps)
    if f == "forbidden":
        return an.forbidden_bound(args.q, args.p)
    pmf, cdf = an.poisson_pmf_cdf(args.rate, args.k)
    return {"pmf": pmf, "cdf": cdf}


_FORMULA_PARAMS = {"c": ("r", "p"), "a": ("r", "p"), "basic": ("p",), "generation": ("p",),
                   "rank2-mixture": ("p", "eps"), "graphic-mixture": ("p", "eps"),
                   "forbidden": ("q", "p"), "poisson": ("rate", "k")}


def cmd_analytic(args) -> int:
    params = {k: getattr(args, k) for k in _FORMULA_PARAMS[args.formula]}
    if any(v is None for v in params.values()):
        missing = [k for k, v in params.items() if v is None]
        raise UsageError(f"formula {args.formula} needs --{' --'.join(missing)}")
    _emit({"formula": args.formula, "params": params, "value": _analytic_value(args)}, args)
    return 0


def cmd_optimize(args) -> int:
    t = args.target
    if t in ("rank2-mixture", "graphic-mixture", "graphic-high-eps"):
        res = an.optimize_mixture({"rank2-mixture": "rank2", "graphic-mixture": "graphic"}
                                  .get(t, t))
        _emit({"target": t, **res}, args)
        return 0
    if t in ("c", "a"):
        if args.r is None:
            raise UsageError(f"target {t} needs --r")
        f = an.c_uniform if t == "c" else an.a_laminar
        x, v = an.optimize_scalar(lambda p: f(args.r, p), 1e-6, 1 - 1e-6)
        _emit({"target": t, "r": args.r, "p": x, "value": v}, args)
        return 0
    if args.q is None:
        raise UsageError("target forbidden needs --q")
    x, v = an.forbidden_optimum(args.q)
    _emit({"target": t, "q": args.q, "p": x, "value": v}, args)
    return 0


def _write_instance(inst: MatroidInstance, args, extra: dict) -> None:
    d = inst.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(d) + "\n")
        _emit_to_stdout = {"written": args.out, **extra}
        sys.stdout.write(json.dumps(_round(_emit_to_stdout)) + "\n")
    else:
        sys.stdout.write(json.dumps(d) + "\n")


def cmd_tight(args) -> int:
    _need_seed(args)
    inst = gen.tight_laminar(args.q, args.r, args.seed)
    _write_instance(inst, args, {"family": "tight-laminar", "q": args.q, "r": args.r,
                                 "seed": args.seed, "estar": inst.meta["estar"]})
    return 0


def cmd_gen(args) -> int:
    _need_seed(args)
    params = {"n": args.n, "r": args.r, "depth": args.depth, "branching": args.branching,
              "vertices": args.vertices, "edges": args.edges, "simple": args.simple,
              "parallel_bias": args.parallel_bias, "q": args.q}
    if args.class_sizes:
        params["class_sizes"] = [int(x) for x in args.class_sizes.split(",")]
    params = {k: v for k, v in params.items() if v is not None}
    try:
        inst = gen.GeneratorSpec(args.family, params, args.seed).build()
    except KeyError as exc:
        raise UsageError(f"family {args.family} needs --{exc.args[0].replace('_', '-')}")
    _write_instance(inst, args, {"family": args.family, "seed": args.seed, "n": inst.n})
    return 0


def cmd_verify(args) -> int:
    _need_seed(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    inst = _load(args.instance)
    res = verify_implication(inst, args.algorithm, args.scheme, args.lang, args.estar,
                             args.trials, args.seed, args.p)
    res.pop("per_element")
    failed = res["violations"] > 0 or res.get("first_one_mismatch", 0) > 0
    if args.lang == "uniform":
        failed |= res["converse_violations"] > 0
    res["passed"] = not failed
    _emit(res, args)
    return 1 if failed else 0


def cmd_oracle(args) -> int:
    inst = _load(args.instance)
    res = H.exact_oracle(inst, args.algorithm, _cfg(args), args.augment)
    _emit({"config": {"instance": args.instance, "algorithm": args.algorithm, "p": args.p,
                      "eps": args.eps, "augment": res.mode}, **res.to_dict()}, args)
    return 0


def cmd_test_dist(args) -> int:
    _need_seed(args)
    if args.trials < 2:
        raise UsageError("--trials must be >= 2")
    inst = _load(args.instance)
    res = H.distribution_tests(inst, args.p, args.trials, args.seed, args.b)
    _emit(res, args)
    return 0 if res["passed"] else 1


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msplab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, seed=True):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the payload to this file")
        if seed:
            p.add_argument("--seed", type=int)
        return p

    s = common(sub.add_parser("simulate", help="Monte Carlo selection frequencies"))
    s.add_argument("--instance", required=True)
    s.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--augment", default="auto", choices=("auto", "off", "both") + MODES)
    s.add_argument("--min-copies", type=int, default=0)
    s.add_argument("--threads", type=int)
    s.add_argument("--assert-min", type=float, help="exit 1 if the min frequency is below")
    s.set_defaults(fn=cmd_simulate)

    s = common(sub.add_parser("analytic", help="evaluate a closed form"), seed=False)
    s.add_argument("--formula", required=True, choices=tuple(_FORMULA_PARAMS))
    s.add_argument("--r", type=int)
    s.add_argument("--p", type=float)
    s.add_argument("--eps", type=float)
    s.add_argument("--q", type=int)
    s.add_argument("--rate", type=float)
    s.add_argument("--k", type=int)
    s.set_defaults(fn=cmd_analytic)

    s = common(sub.add_parser("optimize", help="best parameters of a bound"), seed=False)
    s.add_argument("--target", required=True,
                   choices=("c", "a", "forbidden", "rank2-mixture", "graphic-mixture",
                            "graphic-high-eps"))
    s.add_argument("--r", type=int)
    s.add_argument("--q", type=int)
    s.set_defaults(fn=cmd_optimize)

    s = common(sub.add_parser("tight", help="write a tight laminar instance"))
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.set_defaults(fn=cmd_tight)

    s = common(sub.add_parser("gen", help="write a random instance"))
    s.add_argument("--family", required=True, choices=gen.FAMILIES)
    for flag in ("--n", "--r", "--q", "--depth", "--branching", "--vertices", "--edges"):
        s.add_argument(flag, type=int)
    s.add_argument("--class-sizes", help="comma separated, e.g. 1,4")
    s.add_argument("--simple", action="store_true")
    s.add_argument("--parallel-bias", type=float)
    s.set_defaults(fn=cmd_gen)

    s = common(sub.add_parser("verify", help="paired language/selection check"))
    s.add_argument("--instance", required=True)
    s.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    s.add_argument("--scheme", required=True, choices=SCHEMES)
    s.add_argument("--lang", required=True, choices=tuple(LANGS))
    s.add_argument("--estar", type=int, help="default: every element of OPT(E)")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--trials", type=int, required=True)
    s.set_defaults(fn=cmd_verify)

    s = common(sub.add_parser("oracle", help="exact enumeration for n <= 8"), seed=False)
    s.add_argument("--instance", required=True)
    s.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--eps", type=float, default=0.0)
    s.add_argument("--augment", default="pinned", choices=("pinned", "none", "off"))
    s.set_defaults(fn=cmd_oracle)

    s = common(sub.add_parser("test-dist", help="Poisson structure tests"))
    s.add_argument("--instance", required=True)
    s.add_argument("--p", type=float, default=0.1, help="augmentation threshold")
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--trials", type=int, required=True)
    s.set_defaults(fn=cmd_test_dist)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"msplab {args.cmd}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"msplab {args.cmd}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
