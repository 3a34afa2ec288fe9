"""Compare the numba and pure-Python kernel backends.

Each backend runs in its own interpreter (the backend is fixed at import
time).  Every timing is the minimum over ``--repeat`` runs after one warm-up
call, and the printed digests confirm both backends return identical results.

    python3 benchmarks/bench_backends.py --horizons 1,2,3 --instances 5
"""
import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
from mabprune import BACKEND, InstanceSampler, exhaustive, rtbss
from mabprune.mcts import MctsParams, recommend
from mabprune.search import warmup

horizons, n, repeat = json.loads(sys.argv[1])
warmup()
sampler = InstanceSampler(11)
insts = [sampler.sample(i) for i in range(n)]
results = {}
digest = []
for T in horizons:
    for name, fn in (
        ("exhaustive", lambda m, b: exhaustive(b, T, m)),
        ("rtbss-u", lambda m, b: rtbss(b, T, "universal", m)),
        ("rtbss-k", lambda m, b: rtbss(b, T, "k_step", m)),
        ("uct-100", lambda m, b: recommend(b, T, MctsParams(100, seed=1), m)),
    ):
        fn(*insts[0])
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            outs = [fn(m, b) for m, b in insts]
            best = min(best, time.perf_counter() - t0)
        results[f"{name}/T={T}"] = best / n * 1e3
        digest.append(repr([o if isinstance(o, int) else (o.best_action, o.value) for o in outs]))
print(json.dumps({"backend": BACKEND, "ms": results, "digest": "\n".join(digest)}))
"""


def run_backend(disable_jit: bool, horizons, n, repeat):
    env = dict(os.environ)
    env.pop("MABPRUNE_DISABLE_JIT", None)
    if disable_jit:
        env["MABPRUNE_DISABLE_JIT"] = "1"
    t0 = time.perf_counter()
    out = subprocess.run([sys.executable, "-c", WORKER, json.dumps([horizons, n, repeat])],
                         env=env, check=True, capture_output=True, text=True)
    data = json.loads(out.stdout.strip().splitlines()[-1])
    data["wall_s"] = time.perf_counter() - t0
    return data


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizons", default="1,2,3")
    ap.add_argument("--instances", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    horizons = [int(h) for h in args.horizons.split(",")]

    fast = run_backend(False, horizons, args.instances, args.repeat)
    slow = run_backend(True, horizons, args.instances, args.repeat)

    print(f"{'kernel':<18}{'numba ms':>12}{'python ms':>12}{'speedup':>10}")
    for key in fast["ms"]:
        a, b = fast["ms"][key], slow["ms"][key]
        print(f"{key:<18}{a:>12.4f}{b:>12.3f}{b / a:>10.1f}")
    print(f"process wall time incl. compile: numba {fast['wall_s']:.1f}s, "
          f"python {slow['wall_s']:.1f}s")
    same = hashlib.sha256(fast["digest"].encode()).hexdigest() == \
        hashlib.sha256(slow["digest"].encode()).hexdigest()
    print("results identical across backends:", "yes" if same else "NO")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
