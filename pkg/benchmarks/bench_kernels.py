"""Compare the numba kernels with the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--end-to-end]

Kernel timings call both implementations in one process. ``--end-to-end``
also times a full enumeration in two subprocesses, one with
``CUBEFLAG_NO_NUMBA=1``.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from cubeflag import kernels
from cubeflag.cli import load_family
from cubeflag.colouring import Mode, free_position_masks, group_tables, n_free

CASES = [(Mode.EDGE, 3, "B"), (Mode.VERTEX, 4, "B3"), (Mode.PARTIAL, 4, "B")]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_case(mode, n, name, repeat):
    fam = load_family(name)
    nbits = n_free(mode, n)
    tables = group_tables(mode, n)
    masks = free_position_masks(mode, n, fam)
    sample = np.arange(min(1 << nbits, 1 << 16), dtype=np.int64)

    rows = [
        ("free_mask", lambda: kernels._free_mask_np(sample, masks), lambda: kernels._free_mask_nb(sample, masks)),
        ("canonical", lambda: kernels._canonical_np(sample, tables), lambda: kernels._canonical_nb(sample, tables)),
        (
            "orbit_reps",
            lambda: kernels._orbit_reps_np(nbits, tables, masks),
            lambda: kernels._orbit_reps_nb(np.int64(nbits), tables, masks),
        ),
    ]
    for label, f_np, f_nb in rows:
        t_np, t_nb = best_of(f_np, repeat), best_of(f_nb, repeat)
        print(f"{mode.value:8s} l={n} {name:5s} {label:10s} numpy {t_np:9.4f}s  numba {t_nb:9.4f}s  x{t_np / t_nb:7.1f}")


def end_to_end():
    code = (
        "import time\n"
        "from cubeflag.cli import load_family\n"
        "from cubeflag.colouring import Mode\n"
        "from cubeflag.flags import enumerate_h\n"
        "from cubeflag._accel import BACKEND\n"
        "t0 = time.perf_counter()\n"
        "n = len(enumerate_h(Mode.PARTIAL, 4, load_family('B')))\n"
        "print(BACKEND, n, f'{time.perf_counter() - t0:.2f}s')\n"
    )
    for flag in ("0", "1"):
        env = dict(os.environ, CUBEFLAG_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        print("partial l=4 {B} enumeration:", out.stdout.strip())


def warm_up():
    """Compile the numba kernels on a small case so timings exclude jit cost."""
    mode, n = Mode.EDGE, 3
    tables = group_tables(mode, n)
    masks = free_position_masks(mode, n, load_family("B"))
    codes = np.arange(4, dtype=np.int64)
    kernels._orbit_reps_nb(np.int64(n_free(mode, n)), tables, masks)
    kernels._canonical_nb(codes, tables)
    kernels._free_mask_nb(codes, masks)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    warm_up()
    for case in CASES:
        bench_case(*case, args.repeat)
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
