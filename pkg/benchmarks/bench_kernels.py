"""Compare the numba kernels with the pure-numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Kernel-level timings run in this process (both implementations are always
importable).  The end-to-end obstruction probe is timed in two subprocesses,
one with ``RBLAB_DISABLE_JIT=1``, since that flag is read at import time.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from rblab import _kernels
from rblab.catalog import excluded_target
from rblab.lie import adjoint_action, two_dim_algebra


def best_of(fn, repeat):
    fn()  # warm-up (includes compile for the jit path)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


_PROBE = """
import json, time
from rblab import _kernels
from rblab.catalog import excluded_target, obstruction_probe
t = excluded_target(0.0, 1.0, 2.0)
obstruction_probe(0.0, 1.0, t, budget=2000)
t0 = time.perf_counter()
r = obstruction_probe(0.0, 1.0, t, budget=100000, seed=0)
print(json.dumps({"jit": _kernels.USE_NUMBA, "seconds": time.perf_counter() - t0,
                  "residual": r.residual}))
"""


def probe_subprocess(disable):
    env = dict(os.environ, RBLAB_DISABLE_JIT="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True,
                         text=True, check=True).stdout
    return json.loads(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.USE_NUMBA:
        sys.exit("numba path disabled in this process; unset RBLAB_DISABLE_JIT")

    alg = two_dim_algebra()
    c = np.ascontiguousarray(alg.c)
    phi = np.ascontiguousarray(adjoint_action(alg).phi)
    Bs = np.random.default_rng(0).normal(size=(100_000, 2, 2))
    rows = [("rb_residual_batch (1e5 matrices)",
             best_of(lambda: _kernels.rb_residual_batch(c, c, phi, Bs), args.repeat),
             best_of(lambda: _kernels.rb_residual_batch_numpy(c, c, phi, Bs), args.repeat))]

    t = excluded_target(0.0, 1.0, 2.0)
    tv = np.array([t.g.m[0, 0], t.g.m[0, 1], t.h.m[0, 0], t.h.m[0, 1]])
    lo = np.array([-2.0, -2.0, -2.0, -5.0])
    starts = np.random.default_rng(1).uniform(lo, -lo, (8, 4))
    step0 = np.full(4, 0.5)
    rows.append(("case3 compass search (4e4 evals)",
                 best_of(lambda: _kernels.case3_search(0.0, 1.0, tv, starts, lo, -lo, 40_000, step0, 1e-13, False),
                         args.repeat),
                 best_of(lambda: _kernels.case3_search_numpy(0.0, 1.0, tv, starts, lo, -lo, 40_000, step0,
                                                             1e-13, False), args.repeat)))

    fast, slow = probe_subprocess(False), probe_subprocess(True)
    rows.append(("obstruction_probe, budget 1e5", fast["seconds"], slow["seconds"]))

    print(f"{'kernel':36s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s}")
    for name, a, b in rows:
        print(f"{name:36s} {a:11.4f} {b:11.4f} {b / a:8.1f}")
    print(f"probe residual: numba {fast['residual']:.12g}, numpy {slow['residual']:.12g}")


if __name__ == "__main__":
    main()
