"""Shared fixtures/utilities for the solver-level test suites."""

import numpy as np

import phcslab.fdtd as F
from phcslab.geometry import ROW, DeviceSpec, HeterostructureParams, L3Params, SlabLattice


def l3_device(nx=23, ny=15, D=(0.219, 0.025, 0.2), a=214.0):
    lat = SlabLattice(a=a, r=0.285 * a, H=a, n_slab=2.4, nx=nx, ny=ny)
    return DeviceSpec(lattice=lat, defect=L3Params(*D), target_wavelength=637.0)


def hs_device(nx=30, ny=13, a=210.0):
    lat = SlabLattice(a=a, r=0.275 * a, H=0.96 * a, n_slab=2.4, nx=nx, ny=ny)
    return DeviceSpec(
        lattice=lat, defect=HeterostructureParams(), target_wavelength=637.0
    )


def mirror_image_sources(src, axes_parities):
    """Image-source set making a full-domain run equal a mirror-reduced one."""
    out = [src]
    for axis, parity in axes_parities:
        sign = F.component_parity(src.component, axis, parity)
        new = []
        for s in out:
            new.append(s)
            pos = list(s.position)
            if abs(pos[axis]) > 1e-12:
                pos[axis] = -pos[axis]
                new.append(
                    F.SourceSpec(
                        position=tuple(pos),
                        component=s.component,
                        center_wavelength=s.center_wavelength,
                        bandwidth=s.bandwidth,
                        amplitude=s.amplitude * sign,
                    )
                )
        out = new
    return tuple(out)


def in_plane_air_fill(grid, spec):
    """Weighted air-fraction average over exact lattice periods, mid-slab."""
    a = spec.lattice.a
    dx = grid.dx
    eps = grid.eps_z  # in-plane offsets (0, 0); z sample at +dx/2 is mid-slab
    c = grid.center_index
    plane = eps[:, :, c[2]]
    air = (spec.lattice.eps_slab - plane) / (spec.lattice.eps_slab - 1.0)

    def window_weights(n, centre, half_width):
        pos = (np.arange(n) - centre) * dx
        lo = np.clip(pos - dx / 2, -half_width, half_width)
        hi = np.clip(pos + dx / 2, -half_width, half_width)
        return np.maximum(hi - lo, 0.0)

    wx = window_weights(grid.dims[0], c[0], 2.0 * a)
    wy = window_weights(grid.dims[1], c[1], 2.0 * ROW * a)
    w = wx[:, None] * wy[None, :]
    return float((air * w).sum() / w.sum())
