#!/usr/bin/env python3
"""Benchmark the compiled stencil kernels against the NumPy fallback.

Runs the same cavity-style update loop (Yee + CPML, mirror-reduced slab
grid) on both backends and reports steps/s and the speedup. The two
backends produce bitwise-identical fields; this script checks that too.

Usage: python3 benchmarks/bench_kernels.py [--cells-per-a 12] [--steps 150]
"""

import argparse
import time

import numpy as np

import phcslab.fdtd as F
from phcslab.fdtd.kernels import get_backend
from phcslab.geometry import DeviceSpec, L3Params, SlabLattice, rasterize
from phcslab.pipeline import FUNDAMENTAL_SYMMETRY, default_monitors, default_sources


def build_sim(resolution, steps, backend):
    lat = SlabLattice(a=214.0, r=0.285 * 214.0, H=214.0, n_slab=2.4, nx=15, ny=11)
    dev = DeviceSpec(lattice=lat, defect=L3Params(0.219, 0.025, 0.2), target_wavelength=637.0)
    grid = rasterize(dev, resolution=resolution)
    cfg = F.SimulationConfig(
        grid=grid,
        steps=steps,
        symmetry=FUNDAMENTAL_SYMMETRY,
        sources=default_sources(dev),
        monitors=default_monitors(dev),
    )
    return F.Simulation(cfg, backend=backend)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells-per-a", type=int, default=12)
    parser.add_argument("--steps", type=int, default=150)
    args = parser.parse_args()

    results = {}
    for backend in ("numpy", "compiled"):
        try:
            get_backend(backend)
        except ImportError:
            print(f"{backend:>9}: not available")
            continue
        sim = build_sim(args.cells_per_a, args.steps, backend)
        cells = int(np.prod(sim.phys))
        sim.step()  # warm up
        t0 = time.perf_counter()
        while sim.state.step < args.steps:
            sim.step()
        elapsed = time.perf_counter() - t0
        rate = (args.steps - 1) / elapsed
        mcups = rate * cells / 1e6
        results[backend] = (sim, rate)
        print(
            f"{backend:>9}: {rate:7.2f} steps/s on {cells} cells "
            f"({mcups:7.1f} Mcell-updates/s)"
        )

    if len(results) == 2:
        speedup = results["compiled"][1] / results["numpy"][1]
        same = all(
            np.array_equal(results["compiled"][0].state.arrays[c], results["numpy"][0].state.arrays[c])
            for c in results["compiled"][0].state.arrays
        )
        print(f"speedup: {speedup:.2f}x; fields bitwise identical: {same}")


if __name__ == "__main__":
    main()
