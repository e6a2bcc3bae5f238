"""Compare the numba and pure-numpy kernel backends.

Kernel timings call both implementations directly in one process; the
end-to-end timings run a forest and an SVM cross-validation in a child
process per backend (the backend is fixed at import time by
RTCLASS_DISABLE_NUMBA).

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from rtclass.kernels import numba_kernels, numpy_kernels

E2E = r"""
import json, time
from rtclass import kernels
from rtclass.features import featurize_dataset
from rtclass.learn import evaluate
from rtclass.synth import generate_dataset
from rtclass.trace_model import Label, Tech
ds, _ = generate_dataset({Label.IDLE: 200, Label.BICYCLE: 200, Label.CAR_LIKE: 200}, Tech.UWB, 1)
fm = featurize_dataset(ds, "FC", "f2")
out = {"backend": kernels.BACKEND}
for fam in ("rf", "svm"):
    evaluate(fm.X[::10], fm.y[::10], fam, k=2, seed=0)   # warm-up / JIT compile
    t = time.perf_counter()
    rep = evaluate(fm.X, fm.y, fam, k=10, seed=0)
    out[fam] = [time.perf_counter() - t, rep.mean["accuracy"]]
print(json.dumps(out))
"""


def workloads(rng):
    Xf = rng.normal(size=(600, 5))
    y = rng.integers(0, 3, size=600)
    # a random full tree of depth 10 for traversal
    n_int = 2 ** 10 - 1
    feature = np.concatenate([rng.integers(0, 24, size=n_int), -np.ones(n_int + 1, dtype=np.int64)])
    threshold = np.concatenate([rng.normal(size=n_int), np.zeros(n_int + 1)])
    left = np.concatenate([2 * np.arange(n_int) + 1, -np.ones(n_int + 1, dtype=np.int64)])
    right = np.concatenate([2 * np.arange(n_int) + 2, -np.ones(n_int + 1, dtype=np.int64)])
    leaf = rng.integers(0, 3, size=feature.size)
    Xq = rng.normal(size=(5000, 24))
    Xs = np.hstack([rng.uniform(size=(540, 24)), np.ones((540, 1))])
    ys = np.where(rng.random(540) < 0.5, 1.0, -1.0)
    order = np.concatenate([rng.permutation(540) for _ in range(30)])
    return {
        "best_split (600x5, 3 classes)": ("best_split", (Xf, y, 3)),
        "predict_tree (5000 rows, depth 10)": ("predict_tree", (Xq, feature, threshold, left, right, leaf)),
        "pegasos_train (540x25, 30 epochs)": ("pegasos_train", (Xs, ys, 1e-4, order)),
    }


def bench(fn, args, repeat):
    fn(*args)   # JIT compile / warm caches
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.2:
        number *= 2
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def end_to_end(disable: bool) -> dict:
    env = dict(os.environ, RTCLASS_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True,
                          text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    if numba_kernels is None:
        sys.exit("numba backend unavailable; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<38} {'numpy [ms]':>11} {'numba [ms]':>11} {'speed-up':>9}")
    for name, (fn, fargs) in workloads(rng).items():
        a = getattr(numpy_kernels, fn)(*fargs)
        b = getattr(numba_kernels, fn)(*fargs)
        same = np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=1e-12)
        t_np = bench(getattr(numpy_kernels, fn), fargs, args.repeat)
        t_nb = bench(getattr(numba_kernels, fn), fargs, args.repeat)
        flag = "" if same else "  (outputs differ!)"
        print(f"{name:<38} {t_np * 1e3:>11.3f} {t_nb * 1e3:>11.3f} {t_np / t_nb:>8.1f}x{flag}")

    if not args.skip_e2e:
        print()
        print(f"{'10-fold CV, 600 traces':<38} {'numpy [s]':>11} {'numba [s]':>11} {'speed-up':>9}")
        slow, fast = end_to_end(True), end_to_end(False)
        for fam in ("rf", "svm"):
            ts, tf = slow[fam][0], fast[fam][0]
            note = "" if slow[fam][1] == fast[fam][1] else "  (accuracy differs!)"
            print(f"{fam.upper():<38} {ts:>11.2f} {tf:>11.2f} {ts / tf:>8.1f}x{note}")


if __name__ == "__main__":
    main()
