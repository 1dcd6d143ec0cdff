"""Benchmark the compiled kernels against the NumPy fallback.

Micro-benchmarks call both backends directly in one process; the
end-to-end planner comparison re-runs this script in subprocesses with
STYLEOPT_KERNELS forced, because the backend is chosen at import time.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import importlib.util
import json
import os
import subprocess
import sys
import time

import numpy as np

from styleopt._kernels import _pykernels

HAS_C = importlib.util.find_spec("styleopt._kernels._ckernels") is not None
if HAS_C:
    from styleopt._kernels import _ckernels

LENGTHS = np.array([1.0, 1.0])


def timeit(fn, min_time=0.2):
    fn()  # warm-up
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        dt = time.perf_counter() - t0
        if dt >= min_time:
            return dt / n
        n = max(n * 2, int(n * min_time / max(dt, 1e-9)))


def mlp_params(d=3, seed=0):
    rng = np.random.default_rng(seed)
    return (
        rng.normal(size=(2 * d + 7, 42)),
        rng.normal(size=42),
        rng.normal(size=(42, 21)),
        rng.normal(size=21),
        rng.normal(size=(21, 21)),
        rng.normal(size=21),
    )


def micro(quick=False):
    rng = np.random.default_rng(0)
    params = mlp_params()
    sizes = [1, 8, 48] if quick else [1, 8, 48, 256]
    print(f"{'kernel':<18}{'batch':>6}{'numpy':>12}{'cython':>12}{'speedup':>9}")
    for b in sizes:
        x = rng.uniform(-np.pi, np.pi, size=(b, 10, 3))
        q = x.reshape(-1, 3)
        cases = [
            ("fk_batch", lambda k: k.fk_batch(LENGTHS, 0.0, q)),
            ("ssd_batch", lambda k: k.ssd_batch(x)),
            ("feature_batch", lambda k: k.feature_batch(LENGTHS, 0.0, x)),
            ("mlp_cost_batch", lambda k: k.mlp_cost_batch(LENGTHS, 0.0, x, *params)),
        ]
        for name, call in cases:
            t_py = timeit(lambda: call(_pykernels))
            if HAS_C:
                t_c = timeit(lambda: call(_ckernels))
                print(f"{name:<18}{b:>6}{t_py * 1e6:>10.1f}us{t_c * 1e6:>10.1f}us{t_py / t_c:>8.1f}x")
            else:
                print(f"{name:<18}{b:>6}{t_py * 1e6:>10.1f}us{'-':>12}{'-':>9}")


END_TO_END = r"""
import json, time
import numpy as np
import styleopt
from styleopt import FeaturizedCost, MlpCost, ObjectiveConfig, Task, default_arm, optimize

arm = default_arm()
task = Task(start=[-0.8, 0.6, 0.5], goal=[0.9, 0.7, 0.4], duration=5.0)
out = {"backend": styleopt.kernel_backend}
cost = FeaturizedCost(style_name="sad", w=np.array([0.97, 0.42, -0.5]))
t0 = time.perf_counter()
optimize(ObjectiveConfig(style_cost=cost, lam=0.5), arm, task, 10)
out["featurized_plan_s"] = time.perf_counter() - t0
mlp = MlpCost.initialize("sad", dof=3, rng_seed=0)
t0 = time.perf_counter()
optimize(ObjectiveConfig(style_cost=mlp, lam=0.5), arm, task, 10)
out["mlp_plan_s"] = time.perf_counter() - t0
print(json.dumps(out))
"""


def end_to_end():
    print("\nfull planner run (one optimize call, finite-difference gradients):")
    for backend in ("py", "c") if HAS_C else ("py",):
        env = dict(os.environ, STYLEOPT_KERNELS=backend)
        res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True)
        if res.returncode != 0:
            print(f"  backend {backend}: failed\n{res.stderr}")
            continue
        data = json.loads(res.stdout)
        print(
            f"  backend {data['backend']}: featurized {data['featurized_plan_s'] * 1e3:.0f} ms, "
            f"network {data['mlp_plan_s'] * 1e3:.0f} ms"
        )


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()
    if not HAS_C:
        print("compiled kernels not available; showing NumPy fallback only")
    micro(args.quick)
    end_to_end()
