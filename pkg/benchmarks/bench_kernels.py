"""Time the numba and numpy backends of the hot kernels on a VGA scene.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from depthnormal import CameraIntrinsics, GeoConfig, SceneSpec, generate
from depthnormal._jit import HAVE_NUMBA
from depthnormal.d2n import depth_to_normals
from depthnormal.edges import gradients, non_max_suppression, propagate
from depthnormal.n2d import normals_to_depth
from depthnormal.synth import add_noise, shade


def best_of(fn, repeat):
    fn()  # warm-up (JIT compilation, caches)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    intr = CameraIntrinsics(525.0, 525.0, 319.5, 239.5)
    depth, normals = generate(SceneSpec("sphere", 640, 480, intr, {"center": [0, 0, 3], "radius": 1.5}))
    noisy = add_noise(depth, 0.02, 0)
    img = shade(normals, depth)
    gx, gy = gradients(img)
    mag = np.hypot(gx, gy)
    w = np.random.default_rng(0).random(depth.shape + (4,))
    cfg = GeoConfig()

    kernels = {
        "depth_to_normals": lambda b: depth_to_normals(noisy, intr, cfg, b),
        "normals_to_depth": lambda b: normals_to_depth(noisy, normals, intr, cfg, b),
        "propagate (3 ch)": lambda b: propagate(normals.n, w, cfg.t_prop, backend=b),
        "non_max_suppression": lambda b: non_max_suppression(mag, gx, gy, backend=b),
    }
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if HAVE_NUMBA else ""))
    for name, fn in kernels.items():
        t = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        row = f"{name:<22}" + "".join(f"{t[b]:>11.4f}s" for b in backends)
        if HAVE_NUMBA:
            row += f"{t['numpy'] / t['numba']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
