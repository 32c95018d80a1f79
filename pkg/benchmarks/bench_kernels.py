"""Time the compiled and numpy element-sum kernels on the default workloads.

Run: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from metascope import kernels
from metascope.coding import BeamSpec, synthesize
from metascope.core import ArrayGeometry, Direction, FrequencySpec, MetaAtomResponse
from metascope.field import FeedModel, far_field, sample_near_field


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    geom = ArrayGeometry(20, 20, 0.05, 0.364)
    freq = FrequencySpec(3e9)
    resp, feed = MetaAtomResponse.default(), FeedModel()
    coding = synthesize(geom, freq, BeamSpec.pencil(Direction.from_degrees(30, 0)))
    lam = freq.wavelength
    fine = np.arange(-200, 201) * 0.2 * lam / 2

    workloads = {
        "far field, 361x360 grid": lambda: far_field(geom, freq, coding, resp, feed),
        "near field, 35x35 plane": lambda: sample_near_field(geom, freq, coding, resp, feed),
        "near field, 401x401 plane": lambda: sample_near_field(geom, freq, coding, resp, feed, x=fine, y=fine),
    }
    prev = kernels.backend()
    print(f"{'workload':<28}" + "".join(f"{b:>12}" for b in kernels.available_backends()) + "   speedup")
    try:
        for name, fn in workloads.items():
            row = {}
            for b in kernels.available_backends():
                kernels.use_backend(b)
                row[b] = best_of(fn, args.repeat)
            speed = row["python"] / row["compiled"] if "compiled" in row else float("nan")
            print(f"{name:<28}" + "".join(f"{row[b]:>11.4f}s" for b in kernels.available_backends()) + f"   {speed:6.2f}x")
    finally:
        kernels.use_backend(prev)


if __name__ == "__main__":
    main()
