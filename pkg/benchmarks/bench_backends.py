"""Compare the numba kernels against the numpy fallback on every TPO.

    python3 benchmarks/bench_backends.py --L 4 8 12 --batch 16

Prints one CSV row per (kind, impl, L): median wall time for each backend,
the speedup, and the max abs difference between the two outputs.
"""

import argparse
import csv
import statistics
import sys
import time

import numpy as np

from eqtp import kernels
from eqtp.bench import BenchSetting, make_inputs, run_setting
from eqtp.tpo import all_tpos


def median_ns(kind, impl, setting, x, y, repeats):
    run_setting(kind, impl, setting, x, y)  # warmup: JIT compile and table build
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        run_setting(kind, impl, setting, x, y)
        times.append(time.perf_counter_ns() - t0)
    return int(statistics.median(times))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--L", type=int, nargs="+", default=[4, 8, 12])
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args(argv)
    if "numba" not in kernels.BACKENDS:
        sys.exit("numba is not installed; nothing to compare")

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kind", "impl", "L", "numpy_ns", "numba_ns", "speedup", "max_abs_diff"])
    for kind, impl in all_tpos():
        for L in args.L:
            setting = BenchSetting("mimo", L, args.batch)
            x, y = make_inputs(setting, np.random.default_rng(L))
            ns, out = {}, {}
            for name in ("numpy", "numba"):
                with kernels.use_backend(name):
                    ns[name] = median_ns(kind, impl, setting, x, y, args.repeats)
                    out[name] = run_setting(kind, impl, setting, x, y).data
            diff = float(np.max(np.abs(out["numpy"] - out["numba"])))
            w.writerow([kind, impl, L, ns["numpy"], ns["numba"], f"{ns['numpy'] / ns['numba']:.2f}", f"{diff:.1e}"])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
