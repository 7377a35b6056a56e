"""Compiled vs numpy detection kernels.

Usage: python3 benchmarks/bench_detect.py [--frames N] [--repeat R]

Times both batch kernels on random hypothesis tables for a few IM
configurations and checks that the two backends agree.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from airbeam import _detect_py

try:
    from airbeam import _detect
except ImportError:
    _detect = None

# (label, R_x, T_x, M)
CASES = [
    ("R=2 T=2 BPSK", 2, 2, 2),
    ("R=4 T=4 BPSK", 4, 4, 2),
    ("R=2 T=2 QPSK", 2, 2, 4),
    ("R=4 T=2 16-PSK", 4, 2, 16),
]


def _data(rng, frames, r_x, t_x, m):
    nh = m**t_x
    table = rng.standard_normal((r_x, nh, r_x)) + 1j * rng.standard_normal((r_x, nh, r_x))
    y = rng.standard_normal((frames, r_x)) + 1j * rng.standard_normal((frames, r_x))
    return np.ascontiguousarray(y), np.ascontiguousarray(table)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _detect is None:
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'case':<16} {'kernel':<7} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for label, r_x, t_x, m in CASES:
        y, table = _data(rng, args.frames, r_x, t_x, m)
        for kernel in ("ml_detect_batch", "greedy_detect_batch"):
            name = kernel.split("_")[0]
            py = getattr(_detect_py, kernel)
            t_py = min(timeit.repeat(lambda: py(y, table), number=1, repeat=args.repeat))
            if _detect is None:
                print(f"{label:<16} {name:<7} {1e3 * t_py:>10.2f} {'-':>10} {'-':>8}")
                continue
            cy = getattr(_detect, kernel)
            t_cy = min(timeit.repeat(lambda: cy(y, table), number=1, repeat=args.repeat))
            for a, b in zip(py(y, table), cy(y, table)):
                assert np.array_equal(a, b), f"{label} {kernel}: backends disagree"
            print(f"{label:<16} {name:<7} {1e3 * t_py:>10.2f} {1e3 * t_cy:>10.2f} "
                  f"{t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
