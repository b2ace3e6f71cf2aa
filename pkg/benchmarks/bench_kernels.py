"""Time the halting-accumulation kernel on both backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each case builds the configuration operator once, then times only the
accumulation loop. The numba kernel is compiled before timing starts.
"""
import argparse
import time

import numpy as np

from qfa_lab import _kernels
from qfa_lab.machines import lnh_machine, lys_machine
from qfa_lab.twoway import build_config_operator

CASES = [
    ("lnh", lnh_machine, "aaaabaababab"),
    ("lnh", lnh_machine, "aaaaaaaabaaaabaaaab"),
    ("lys", lys_machine, "aaaaaabaaaaaaa"),
    ("lys", lys_machine, "aaaaaaaaabaaaaaaaaaaaaaaaaaaa"),
]


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'machine':8} {'len':>4} {'dim':>6} {'steps':>6} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, make, w in CASES:
        cs = build_config_operator(make(), w)
        blocks = cs.blocks()
        psi = np.zeros(cs.dim, dtype=np.complex128)
        psi[cs.index(make().initial, 1)] = 1.0
        run = {b: (lambda b=b: _kernels.accumulate(*blocks, psi, 1e-12, 100_000, backend=b))
               for b in ("numpy", "numba")}
        run["numba"]()  # compile outside the timed region
        t_np, out_np = best_time(run["numpy"], args.repeat)
        t_nb, out_nb = best_time(run["numba"], args.repeat)
        assert abs(out_np[0] - out_nb[0]) <= 1e-12 and out_np[3] == out_nb[3]
        print(f"{name:8} {len(w):>4} {cs.dim:>6} {out_np[3]:>6} {1e3 * t_np:>10.2f} "
              f"{1e3 * t_nb:>10.2f} {t_np / t_nb:>8.1f}")


if __name__ == "__main__":
    main()
