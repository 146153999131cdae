"""Compare the compiled and the numpy sweep kernels.

    python3 benchmarks/bench_kernels.py --sizes 10 20 30 --sweeps 5

Each configuration runs a fixed number of sweeps on ``gen_random(n, seed)``
(termination tests disabled) and reports the best wall time over
``--repeat`` runs.  Both backends must return bit-identical cores.
"""
import argparse
import time

import numpy as np

from otdiag import RunConfig, run
from otdiag.kernels import available_backends
from otdiag.tensor import gen_random


def best_time(a, cfg, repeat):
    times = []
    res = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        res = run(a, cfg)
        times.append(time.perf_counter() - t0)
    return min(times), res


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 30, 40])
    p.add_argument("--sweeps", type=int, default=5)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--eta-over-n", type=float, default=0.05)
    p.add_argument("--pivot-norm", choices=["spectral", "frobenius"], default="spectral")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    backends = available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'n':>4} " + " ".join(f"{b + ' ms/sweep':>18}" for b in backends)
          + (f" {'speedup':>8} {'identical':>9}" if len(backends) > 1 else ""))
    for n in args.sizes:
        a = gen_random(n, args.seed)
        row, cores = [], []
        for b in backends:
            cfg = RunConfig(eta=args.eta_over_n / n, max_sweeps=args.sweeps, tol_grad=1e-300,
                            tol_f=1e-300, norm_kind=args.pivot_norm, backend=b)
            t, res = best_time(a, cfg, args.repeat)
            row.append(1e3 * t / res.sweeps_used)
            cores.append(res.core)
        line = f"{n:>4} " + " ".join(f"{ms:>18.2f}" for ms in row)
        if len(backends) > 1:
            speedup = row[backends.index("python")] / row[backends.index("cython")]
            line += f" {speedup:>7.1f}x {str(np.array_equal(*cores)):>9}"
        print(line)


if __name__ == "__main__":
    main()
