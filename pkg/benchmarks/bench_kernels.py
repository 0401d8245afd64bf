"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each numba kernel is called once before timing so compilation is excluded.
"""

import argparse
import timeit

import numpy as np

from fringent import W_STATE, kernels
from fringent._accel import HAVE_NUMBA


def cases():
    rng = np.random.default_rng(0)
    thetas = np.linspace(0, np.pi, 64)
    phis = 2 * np.pi * np.arange(128) / 128
    psi = W_STATE.ket().reshape(2, 2, 2)
    starts = rng.normal(size=(40, 3, 2)) + 1j * rng.normal(size=(40, 3, 2))
    env = rng.random(1 << 20) + 1.0
    dens = env * rng.random(env.size)
    uni = rng.random(env.size)
    return {
        "torus_extrema (512^2)": ((0.3, 0.2, 0.1, 512), kernels.torus_extrema_numpy, kernels.torus_extrema_numba),
        "deviation_grid (64x128)": ((0.5, 0.2, -0.1, 3.0, 2.0, thetas, phis),
                                    kernels.deviation_grid_numpy, kernels.deviation_grid_numba),
        "product_overlap (40 starts)": ((psi, starts, 500, 1e-15),
                                        kernels.product_overlap_numpy, kernels.product_overlap_numba),
        "accept_mask (2^20)": ((dens, env, uni), kernels.accept_mask_numpy, kernels.accept_mask_numba),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':30s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for name, (a, f_np, f_nb) in cases().items():
        f_nb(*a)
        t_np = min(timeit.repeat(lambda: f_np(*a), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: f_nb(*a), number=1, repeat=args.repeat))
        print(f"{name:30s} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
