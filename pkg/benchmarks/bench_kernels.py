"""Time the numba and numpy flavours of each kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one ``key=value`` record per (kernel, flavour).  The numba timings
exclude the first call, which pays for compilation.
"""

import argparse
import time

import numpy as np

from bncx import _accel, kernels
from bncx.fixtures import random_bnc
from bncx.compiler import compile_class_formula
from bncx.ftree import extract_ftree
from bncx.jointree import compile_jointree
from bncx.nnf import instance_matrix


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def workloads(rng):
    table = rng.random((4, 200_000))
    mats = [rng.random((3, int(rng.integers(2, 64)))) for _ in range(5_000)]

    # a compiled class formula evaluated on every feature instance
    spec = random_bnc(22, shape="tree", max_vars=14, max_features=8, card_range=(3, 3))
    jt = compile_jointree(spec.net, spec.features, spec.target)
    ft = extract_ftree(jt, spec)
    comp = max((compile_class_formula(spec, ft, i) for i in range(spec.num_classes)), key=lambda c: c.stats.nodes)
    arrs = comp.store.arrays(comp.root, spec.features)
    rows = instance_matrix(spec.feature_cards())

    return {
        "classify_columns": lambda f: f(table, kernels.ARGMAX, 0.0, 0),
        "decide_verdict": lambda f: [f(m, 1, kernels.ARGMAX, 0.0, 0) for m in mats],
        "eval_circuit": lambda f: f(*arrs, rows),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(0)
    for name, run in workloads(rng).items():
        jit = getattr(kernels, f"{name}_jit")
        npy = getattr(kernels, f"{name}_numpy")
        run(jit)  # compile
        t_jit = best_of(lambda: run(jit), args.repeat)
        t_np = best_of(lambda: run(npy), args.repeat)
        print(f"kernel={name} flavour=numba seconds={t_jit:.6f}")
        print(f"kernel={name} flavour=numpy seconds={t_np:.6f} speedup_numba={t_np / t_jit:.2f}")


if __name__ == "__main__":
    main()
