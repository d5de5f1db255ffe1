#!/usr/bin/env python3
"""Compare the numba and numpy rasterization backends.

The render kernels dominate bulk dataset generation, so both backends are
timed on the same synthetic scenes. The backend is fixed per process via
SCENEDIFF_BACKEND, so this script re-executes itself once per backend.

Usage:
    python benchmarks/bench_render.py [--scenes 200] [--size 640x480]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def measure(n_scenes: int, width: int, height: int) -> dict:
    import numpy as np

    from scenediff.raster import active_backend, render_scene, warmup
    from scenediff.scene import DEFAULT_CLASSES, Detection, Scene
    from scenediff.boxes import BoundingBox

    rng = np.random.default_rng(7)
    scenes = []
    for _ in range(n_scenes):
        dets = []
        for i in range(int(rng.integers(3, 9))):
            label = str(rng.choice(DEFAULT_CLASSES))
            w = float(rng.uniform(0.05, 0.3) * min(width, height))
            h = float(rng.uniform(0.05, 0.3) * min(width, height))
            x0 = float(rng.uniform(0, width - w))
            y0 = float(rng.uniform(0, height - h))
            dets.append(Detection(f"{label}-{i}", label, 0.9, BoundingBox(x0, y0, x0 + w, y0 + h)))
        scenes.append(Scene(width, height, tuple(dets)))

    warmup()
    start = time.perf_counter()
    checksum = 0
    for s in scenes:
        checksum ^= int(render_scene(s)[::97, ::97].sum())
    elapsed = time.perf_counter() - start
    return {
        "backend": active_backend(),
        "scenes": n_scenes,
        "seconds": elapsed,
        "scenes_per_second": n_scenes / elapsed,
        "checksum": checksum,
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--scenes", type=int, default=200)
    parser.add_argument("--size", default="640x480")
    parser.add_argument("--measure", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    width, height = (int(v) for v in args.size.split("x"))

    if args.measure:
        print(json.dumps(measure(args.scenes, width, height)))
        return

    results = []
    for backend in ("numpy", "numba"):
        env = dict(os.environ, SCENEDIFF_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, __file__, "--scenes", str(args.scenes),
             "--size", args.size, "--measure"],
            env=env, capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print(f"{backend:>6}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
            continue
        results.append(json.loads(proc.stdout))

    print(f"\nrender benchmark: {args.scenes} scenes at {args.size}")
    for r in results:
        print(f"{r['backend']:>6}: {r['seconds']:7.3f}s  "
              f"({r['scenes_per_second']:8.1f} scenes/s)")
    if len(results) == 2:
        if results[0]["checksum"] != results[1]["checksum"]:
            print("WARNING: backends disagree on pixel output")
        ratio = results[0]["seconds"] / results[1]["seconds"]
        print(f"numba speedup over numpy: {ratio:.2f}x")


if __name__ == "__main__":
    main()
