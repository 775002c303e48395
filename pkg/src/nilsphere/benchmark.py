"""Throughput benchmark comparing the compiled and pure-numpy backends.

Run as ``python -m nilsphere.benchmark``.  The backend is chosen at import
time from the ``NILSPHERE_NUMBA`` environment variable, so each backend is
timed in a fresh subprocess; the parent only orchestrates and prints the
comparison table.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def _worker(case: str, steps: int) -> dict:
    from . import backend, sampling
    from .integrators import IntegratorConfig, integrate
    from .reduction import reduced_from_product

    state = sampling.random_regular_product_states(1, 7)[0]
    if case == "split-product":
        def run(n):
            cfg = IntegratorConfig(
                dt=1e-3, t_max=n * 1e-3, scheme="split-product",
                sample_stride=n,
            )
            integrate("H_product", state, cfg)
    elif case == "midpoint-chart":
        reduced = reduced_from_product(state)

        def run(n):
            cfg = IntegratorConfig(
                dt=1e-3, t_max=n * 1e-3, scheme="implicit-midpoint-chart",
                sample_stride=n,
            )
            integrate("H_reduced", reduced, cfg)
    else:
        raise ValueError(f"unknown benchmark case: {case!r}")

    run(min(steps, 64))  # warm-up (triggers compilation on the jit backend)
    started = time.perf_counter()
    run(steps)
    elapsed = time.perf_counter() - started
    return {
        "case": case,
        "backend": "numba" if backend.USE_NUMBA else "numpy",
        "steps": steps,
        "seconds": elapsed,
        "steps_per_second": steps / elapsed,
    }


def _spawn(case: str, steps: int, use_numba: bool) -> dict:
    env = dict(os.environ)
    env["NILSPHERE_NUMBA"] = "1" if use_numba else "0"
    proc = subprocess.run(
        [sys.executable, "-m", "nilsphere.benchmark", "--worker", case,
         str(steps)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nilsphere.benchmark",
        description="compare compiled and pure-numpy integrator throughput",
    )
    parser.add_argument("--steps", type=int, default=200_000,
                        help="time steps per case (default 200000)")
    parser.add_argument("--worker", nargs=2, metavar=("CASE", "STEPS"),
                        help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.worker is not None:
        case, steps = args.worker[0], int(args.worker[1])
        print(json.dumps(_worker(case, steps)))
        return 0

    cases = ["split-product", "midpoint-chart"]
    rows = []
    for case in cases:
        steps = args.steps if case == "split-product" else args.steps // 10
        for use_numba in (True, False):
            rows.append(_spawn(case, steps, use_numba))
    width = max(len(c) for c in cases)
    print(f"{'case':<{width}}  {'backend':<7}  {'steps':>9}  "
          f"{'seconds':>8}  {'steps/s':>12}")
    by_case = {}
    for row in rows:
        print(f"{row['case']:<{width}}  {row['backend']:<7}  "
              f"{row['steps']:>9}  {row['seconds']:>8.3f}  "
              f"{row['steps_per_second']:>12.0f}")
        by_case.setdefault(row["case"], {})[row["backend"]] = row
    for case, pair in by_case.items():
        if {"numba", "numpy"} <= set(pair):
            ratio = (pair["numba"]["steps_per_second"]
                     / pair["numpy"]["steps_per_second"])
            print(f"{case}: compiled backend is {ratio:.1f}x faster")
    return 0


if __name__ == "__main__":
    sys.exit(main())
