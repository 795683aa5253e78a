"""Timing comparison of the compiled and NumPy kernel backends.

Runs every batched kernel on recipe-scale inputs with both backends,
checks bit-identity of the outputs, and prints per-kernel timings.

    python benchmarks/bench_kernels.py [--rows N] [--samples N]
"""

import argparse
import timeit

import numpy as np

from lmimo._kernels import _ops_py

try:
    from lmimo._kernels import _ops_cy
except ImportError:
    _ops_cy = None


def make_inputs(rows, n, rng):
    x = np.ascontiguousarray(rng.standard_normal((rows, n)) * 3.0)
    lam = np.full(rows, 0.35)
    beta = 2.0 * lam * 12
    return x, lam, beta


def bench_one(label, call_py, call_cy, repeat, number):
    out_py = call_py()
    t_py = min(timeit.repeat(call_py, repeat=repeat, number=number)) / number
    if call_cy is None:
        print(f"{label:14s} numpy {t_py * 1e3:8.2f} ms   (no compiled backend)")
        return
    out_cy = call_cy()
    if not np.array_equal(out_py, out_cy):
        raise AssertionError(f"{label}: backends disagree")
    t_cy = min(timeit.repeat(call_cy, repeat=repeat, number=number)) / number
    print(f"{label:14s} numpy {t_py * 1e3:8.2f} ms   cython {t_cy * 1e3:8.2f} ms"
          f"   x{t_py / t_cy:5.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=16)
    parser.add_argument("--samples", type=int, default=75000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--number", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(12345)
    x, lam, beta = make_inputs(args.rows, args.samples, rng)
    folded = _ops_py.fold_batch(x, lam)
    d2 = _ops_py.diff_batch(folded, 2)
    j_idx = 2

    print(f"batch {args.rows} x {args.samples} float64, "
          f"best of {args.repeat} x {args.number}")
    cases = [
        ("fold", lambda ops: ops.fold_batch(x, lam)),
        ("quantize", lambda ops: ops.quantize_batch(folded, lam, 2)),
        ("diff2", lambda ops: ops.diff_batch(folded, 2)),
        ("cumsum0", lambda ops: ops.cumsum0_batch(folded)),
        ("round_2lam", lambda ops: ops.round_2lam_batch(x, lam)),
        ("unfold2", lambda ops: ops.unfold_batch(d2, lam, beta, 2, j_idx)),
    ]
    for label, fn in cases:
        bench_one(
            label,
            lambda fn=fn: fn(_ops_py),
            (lambda fn=fn: fn(_ops_cy)) if _ops_cy is not None else None,
            args.repeat, args.number)


if __name__ == "__main__":
    main()
