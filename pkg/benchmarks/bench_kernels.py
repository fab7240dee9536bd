"""Compiled vs pure-Python kernels: trials per second for each workload.

    python3 benchmarks/bench_kernels.py [--trials N] [--python-trials M]

Each backend runs in its own interpreter (the switch is read at import
time).  The Python path is slow, so it gets fewer trials by default.
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from msplab._jit import BACKEND
from msplab.algorithms import RunConfig
from msplab.generators import random_graph, tight_laminar, uniform_instance
from msplab.harness import estimate

trials = int(sys.argv[1])
cases = {
    "greedy/uniform(100,3)": (uniform_instance(100, 3), "greedy", RunConfig(0.39)),
    "greedy/tight(20,3)": (tight_laminar(20, 3, 1), "greedy", RunConfig(0.45)),
    "generation/graph(12,30)": (random_graph(12, 30, True, 0.0, 2), "generation", RunConfig(0.45)),
    "mixture/graph(12,40)": (random_graph(12, 40, False, 0.6, 3), "mixture-graphic",
                             RunConfig(0.5, 0.0141)),
}
out = {"backend": BACKEND}
for name, (inst, algo, cfg) in cases.items():
    estimate(inst, algo, cfg, 16, 0, threads=1)          # compile / warm up
    t = time.perf_counter()
    estimate(inst, algo, cfg, trials, 1, threads=1)
    out[name] = trials / (time.perf_counter() - t)
print(json.dumps(out))
"""


def run(flag, trials):
    env = dict(os.environ, MSP_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", WORKER, str(trials)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=50_000)
    ap.add_argument("--python-trials", type=int, default=500)
    args = ap.parse_args()
    fast = run("1", args.trials)
    slow = run("0", args.python_trials)
    print(f"{'workload':28s} {'numba/s':>12s} {'python/s':>12s} {'speedup':>9s}")
    for name in fast:
        if name == "backend":
            continue
        print(f"{name:28s} {fast[name]:12.0f} {slow[name]:12.1f} {fast[name] / slow[name]:8.0f}x")


if __name__ == "__main__":
    main()
