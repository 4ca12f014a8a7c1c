"""Compare the compiled and numpy GF(2) kernels.

Run from the repository root after building the extension::

    python benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from confqkd import _pykernels
from confqkd.codes import get_code

try:
    from confqkd import _ckernels
except ImportError:
    _ckernels = None


def _cases(rng):
    dense = rng.integers(0, 2, size=(512, 1024), dtype=np.uint8)
    tall = rng.integers(0, 2, size=(1024, 256), dtype=np.uint8)
    yield "rref 512x1024", "rref", (dense,)
    yield "rref 1024x256", "rref", (tall,)
    for name in ("golay_23_12", "random_20_12_2"):
        code = get_code(name)
        h = code.parity_check.entries.astype(np.int64)
        r = h.shape[0]
        colsyn = (h << np.arange(r - 1, -1, -1, dtype=np.int64)[:, None]).sum(axis=0)
        yield f"coset_leaders {name}", "coset_leaders", (colsyn, r)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy kernels are timed")
    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, fn, inputs in _cases(np.random.default_rng(args.seed)):
        py = min(timeit.repeat(lambda: getattr(_pykernels, fn)(*inputs), number=1, repeat=args.repeat))
        if _ckernels is None:
            print(f"{label:32s} {py * 1e3:12.2f} {'-':>12s} {'-':>8s}")
            continue
        cy = min(timeit.repeat(lambda: getattr(_ckernels, fn)(*inputs), number=1, repeat=args.repeat))
        out_py, out_cy = getattr(_pykernels, fn)(*inputs), getattr(_ckernels, fn)(*inputs)
        if fn == "rref":
            same = np.array_equal(out_py[0], out_cy[0]) and list(out_py[1]) == list(out_cy[1])
        else:
            same = np.array_equal(out_py, out_cy)
        flag = "" if same else "  MISMATCH"
        print(f"{label:32s} {py * 1e3:12.2f} {cy * 1e3:12.2f} {py / cy:7.1f}x{flag}")


if __name__ == "__main__":
    main()
