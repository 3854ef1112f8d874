"""Device geometry: hole layouts and rasterized permittivity grids.

A device is a triangular-lattice air-hole slab with an optional defect:
either an L3 cavity (three missing holes along x, with the three nearest
holes on each side displaced outward) or a line-defect heterostructure
waveguide cavity (one missing row, lattice constant graded along x near
the center). Rasterization samples relative permittivity at the three
electric-field sample points of each Yee cell, with volume-fraction
subpixel averaging: 8x8 midpoint supersampling of the in-plane hole
geometry times the exact overlap fraction of the flat slab interfaces.

All lengths are nanometres unless noted. Grids are node-centred and
mirror-symmetric about x=0, y=0, z=0 whenever the device is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import GeometryError, SizingError, ZeroFieldError

ROW = math.sqrt(3.0) / 2.0  # row spacing of a triangular lattice, units of a

# in-plane fills are estimated by 8x8 midpoint supersampling (circular
# interfaces); the z fill of the slab is an exact overlap fraction since
# those interfaces are flat and axis-aligned
_NSUB_XY = 8
_SUB_IN_PLANE = _NSUB_XY**2


@dataclass(frozen=True)
class SlabLattice:
    """Triangular-lattice slab parameters.

    a: lattice constant; r: hole radius; H: slab thickness; n_slab:
    refractive index; nx, ny: lattice periods kept along x and y;
    padding: air margin above/below the slab (None = 0.7*wavelength
    plus ten cells, resolved at rasterization time).
    """

    a: float
    r: float
    H: float
    n_slab: float
    nx: int = 15
    ny: int = 11
    padding: Optional[float] = None

    def __post_init__(self):
        if not self.a > 0:
            raise GeometryError(f"lattice constant must be positive, got {self.a}")
        if not 0 <= self.r < self.a / 2:
            raise GeometryError(f"hole radius must satisfy 0 <= r < a/2, got r={self.r}")
        if self.H < 0:
            raise GeometryError(f"slab thickness must be >= 0, got {self.H}")
        if not self.n_slab > 1:
            raise GeometryError(f"slab index must exceed 1, got {self.n_slab}")
        if self.nx < 1 or self.ny < 1:
            raise GeometryError(f"need at least one period per direction, got {self.nx}x{self.ny}")
        if self.ny % 2 == 0:
            raise GeometryError(f"ny must be odd so a row lies on y=0, got {self.ny}")
        if self.padding is not None and self.padding < 0:
            raise GeometryError(f"padding must be >= 0, got {self.padding}")

    @property
    def eps_slab(self) -> float:
        return self.n_slab**2


@dataclass(frozen=True)
class L3Params:
    """Outward displacements of the three holes flanking an L3 defect, in units of a."""

    D1: float = 0.0
    D2: float = 0.0
    D3: float = 0.0

    def __post_init__(self):
        for name in ("D1", "D2", "D3"):
            v = getattr(self, name)
            if not 0 <= v < 0.5:
                raise GeometryError(f"{name} must lie in [0, 0.5), got {v}")


@dataclass(frozen=True)
class HeterostructureParams:
    """Line-defect waveguide cavity with axially graded lattice constant.

    W: transverse centre-to-centre distance of the two rows bounding the
    line defect, units of a. a1_ratio/a2_ratio: graded lattice constants
    relative to a. n_a1: periods at a1 on each side of the core; n_a2:
    total periods at a2 (odd, centred on x=0).
    """

    W: float = 1.69
    a1_ratio: float = 1.025
    a2_ratio: float = 1.05
    n_a1: int = 2
    n_a2: int = 1

    def __post_init__(self):
        if not 1 <= self.a1_ratio <= self.a2_ratio:
            raise GeometryError(
                f"grading must be monotone, need 1 <= a1 <= a2, got {self.a1_ratio}, {self.a2_ratio}"
            )
        if self.n_a1 < 0 or self.n_a2 < 1:
            raise GeometryError("need n_a1 >= 0 and n_a2 >= 1")
        if self.n_a2 % 2 == 0:
            raise GeometryError(f"n_a2 must be odd so the core is centred, got {self.n_a2}")
        if self.W <= 0:
            raise GeometryError(f"defect width W must be positive, got {self.W}")


Defect = Union[None, L3Params, HeterostructureParams]


@dataclass(frozen=True)
class DeviceSpec:
    """A slab lattice plus an optional cavity defect and the design wavelength."""

    lattice: SlabLattice
    defect: Defect = None
    target_wavelength: float = 637.0

    def __post_init__(self):
        if not self.target_wavelength > 0:
            raise GeometryError(f"target wavelength must be positive, got {self.target_wavelength}")
        lat = self.lattice
        if isinstance(self.defect, L3Params):
            need = 2 * (4 + self.defect.D3) + 1
            if lat.nx < need:
                raise GeometryError(
                    f"L3 defect needs nx >= {math.ceil(need)} so displaced holes fit, got {lat.nx}"
                )
            if lat.ny < 3:
                raise GeometryError(f"L3 defect needs ny >= 3, got {lat.ny}")
        if isinstance(self.defect, HeterostructureParams):
            if self.defect.W * lat.a <= 2 * lat.r:
                raise GeometryError(
                    f"rows would intersect: W*a = {self.defect.W * lat.a:.3f} <= 2r = {2 * lat.r:.3f}"
                )
            if lat.ny < 3:
                raise GeometryError(f"heterostructure needs ny >= 3, got {lat.ny}")
            core = self.defect.n_a2 + 2 * self.defect.n_a1
            if lat.nx < core + 2:
                raise GeometryError(
                    f"graded core spans {core} periods; nx = {lat.nx} leaves no mirror periods"
                )


@dataclass(frozen=True)
class PermittivityGrid:
    """Relative permittivity sampled at the Ex, Ey, Ez points of each Yee cell.

    dims are node counts (odd, so x=y=z=0 lies on a node); dx is the uniform
    cell size in nm. Sample positions: eps_x at (i+1/2, j, k), eps_y at
    (i, j+1/2, k), eps_z at (i, j, k+1/2), in units of dx relative to the
    node grid, whose origin sits at -(dims-1)/2 * dx per axis.
    """

    dims: tuple
    dx: float
    eps_x: np.ndarray = field(repr=False)
    eps_y: np.ndarray = field(repr=False)
    eps_z: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("eps_x", "eps_y", "eps_z"):
            arr = getattr(self, name)
            if arr.shape != tuple(self.dims):
                raise GeometryError(f"{name} shape {arr.shape} != dims {self.dims}")

    @property
    def origin(self) -> tuple:
        return tuple(-(n - 1) / 2 * self.dx for n in self.dims)

    @property
    def center_index(self) -> tuple:
        return tuple((n - 1) // 2 for n in self.dims)

    def components(self):
        return self.eps_x, self.eps_y, self.eps_z

    @property
    def nbytes(self) -> int:
        return self.eps_x.nbytes + self.eps_y.nbytes + self.eps_z.nbytes


def _plain_rows(lat: SlabLattice):
    """Rows of the unperturbed lattice: (y, x-array) pairs, units of a."""
    m_half = (lat.ny - 1) // 2
    x_half = (lat.nx - 1) / 2
    rows = []
    for m in range(-m_half, m_half + 1):
        off = 0.5 if m % 2 else 0.0
        lo = math.ceil(-x_half - off - 1e-9)
        hi = math.floor(x_half - off + 1e-9)
        xs = np.arange(lo, hi + 1, dtype=float) + off
        rows.append((m * ROW, xs))
    return rows


def _l3_holes(lat: SlabLattice, params: L3Params):
    shifts = {2: params.D1, 3: params.D2, 4: params.D3}
    pts = []
    for y, xs in _plain_rows(lat):
        if abs(y) < 1e-12:
            for x in xs:
                u = round(x)
                if abs(u) <= 1:
                    continue
                d = shifts.get(abs(u), 0.0)
                pts.append((x + math.copysign(d, x), y))
        else:
            pts.extend((x, y) for x in xs)
    return pts


def _hs_wall_columns(lat: SlabLattice, p: HeterostructureParams, in_nm=True):
    """Per-side x positions of wall-row holes (rows |m| odd), ascending."""
    a = lat.a if in_nm else 1.0
    a1 = p.a1_ratio * a
    a2 = p.a2_ratio * a
    n_reg = max(1, math.ceil((lat.nx - p.n_a2 - 2 * p.n_a1) / 2))
    cols = []
    x = a2 / 2
    cols.append(x)
    for _ in range((p.n_a2 - 1) // 2):
        x += a2
        cols.append(x)
    for _ in range(p.n_a1):
        x += a1
        cols.append(x)
    for _ in range(n_reg):
        x += a
        cols.append(x)
    return cols


def _hs_holes(lat: SlabLattice, p: HeterostructureParams):
    """Hole centres in nm for the heterostructure device."""
    a = lat.a
    wall = _hs_wall_columns(lat, p)
    # rows of aligned type sit at the midpoints between wall columns, plus
    # the centre column and a final half-period continuation
    mids = [0.0] + [(wall[i] + wall[i + 1]) / 2 for i in range(len(wall) - 1)]
    mids.append(wall[-1] + a / 2)
    m_half = (lat.ny - 1) // 2
    pts = []
    for m in range(-m_half, m_half + 1):
        if m == 0:
            continue
        am = abs(m)
        y = math.copysign(p.W * a / 2 + (am - 1) * ROW * a, m)
        xs = wall if am % 2 == 1 else mids
        for x in xs:
            pts.append((x, y))
            if x > 0:
                pts.append((-x, y))
    return pts


def hole_centers(spec: DeviceSpec) -> np.ndarray:
    """All hole centres and radii for a device, as an (N, 3) array [x, y, r] in nm.

    Rows are sorted lexicographically by (x, y). Raises GeometryError when
    two holes overlap, naming the offending pair.
    """
    lat = spec.lattice
    if isinstance(spec.defect, HeterostructureParams):
        pts = _hs_holes(lat, spec.defect)
    elif isinstance(spec.defect, L3Params):
        pts = [(x * lat.a, y * lat.a) for x, y in _l3_holes(lat, spec.defect)]
    else:
        pts = [
            (x * lat.a, y * lat.a)
            for y, xs in _plain_rows(lat)
            for x in xs
        ]
    out = np.empty((len(pts), 3))
    if pts:
        out[:, 0] = [p[0] for p in pts]
        out[:, 1] = [p[1] for p in pts]
    out[:, 2] = lat.r
    order = np.lexsort((out[:, 1], out[:, 0]))
    out = out[order]
    _check_overlaps(out)
    return out


def _check_overlaps(holes: np.ndarray):
    if len(holes) < 2 or holes[0, 2] == 0:
        return
    x = holes[:, 0]
    for i in range(len(holes) - 1):
        reach = holes[i, 2] + holes[i + 1 :, 2].max(initial=0.0)
        j = i + 1
        while j < len(holes) and x[j] - x[i] < reach:
            d = math.hypot(x[j] - x[i], holes[j, 1] - holes[i, 1])
            if d < holes[i, 2] + holes[j, 2] - 1e-9:
                raise GeometryError(
                    f"holes overlap: ({holes[i,0]:.3f}, {holes[i,1]:.3f}) and "
                    f"({holes[j,0]:.3f}, {holes[j,1]:.3f}) are {d:.3f} nm apart, "
                    f"sum of radii {holes[i,2] + holes[j,2]:.3f} nm"
                )
            j += 1


def device_extent(spec: DeviceSpec, resolution: int) -> tuple:
    """Half-extents (x, y, z) in nm of the simulation domain for a device."""
    lat = spec.lattice
    dx = lat.a / resolution
    if isinstance(spec.defect, HeterostructureParams):
        wall = _hs_wall_columns(lat, spec.defect)
        x_half = wall[-1] + lat.a / 2
        m_half = (lat.ny - 1) // 2
        y_half = spec.defect.W * lat.a / 2 + (m_half - 1) * ROW * lat.a + ROW * lat.a / 2
    else:
        x_half = lat.nx * lat.a / 2
        m_half = (lat.ny - 1) // 2
        y_half = (m_half + 0.5) * ROW * lat.a
    padding = lat.padding
    if padding is None:
        padding = 0.7 * spec.target_wavelength + 10 * dx
    z_half = lat.H / 2 + padding
    return x_half, y_half, z_half


def _slab_fraction(z_nodes: np.ndarray, offset: float, dx: float, H: float) -> np.ndarray:
    """Exact overlap fraction of each sample cell with the slab |z| <= H/2."""
    if H <= 0:
        return np.zeros(len(z_nodes))
    z = (z_nodes + offset) * dx
    lo = np.maximum(z - dx / 2, -H / 2)
    hi = np.minimum(z + dx / 2, H / 2)
    return np.maximum(hi - lo, 0.0) / dx


def _hole_counts(nx_nodes, ny_nodes, cx, cy, offx, offy, dx, holes) -> np.ndarray:
    """Per-cell count (0.._SUB_IN_PLANE) of in-plane subsamples inside any hole."""
    m = _NSUB_XY
    half = (m - 1) / (2 * m)
    fx = (np.arange(m * nx_nodes) / m - half - cx + offx) * dx
    fy = (np.arange(m * ny_nodes) / m - half - cy + offy) * dx
    fine = np.zeros((len(fx), len(fy)), dtype=bool)
    for hx, hy, r in holes:
        if r <= 0:
            continue
        i0, i1 = np.searchsorted(fx, [hx - r, hx + r])
        j0, j1 = np.searchsorted(fy, [hy - r, hy + r])
        if i0 >= i1 or j0 >= j1:
            continue
        ddx = fx[i0:i1, None] - hx
        ddy = fy[None, j0:j1] - hy
        fine[i0:i1, j0:j1] |= ddx * ddx + ddy * ddy <= r * r
    return (
        fine.reshape(nx_nodes, m, ny_nodes, m).sum(axis=(1, 3)).astype(float)
    )


def rasterize(
    spec: DeviceSpec,
    resolution: int,
    max_bytes: int = 2 << 30,
) -> PermittivityGrid:
    """Sample the device permittivity on a Yee grid at `resolution` cells per a.

    Cells straddling a dielectric interface get the volume-fraction average
    of the permittivity: eps = 1 + (n^2 - 1) * fill with fill the product
    of the in-plane solid fraction (8x8 midpoint subsamples) and the exact
    z overlap with the slab. Mirror-symmetric devices produce bit-for-bit
    symmetric grids.
    """
    if resolution < 8:
        raise GeometryError(f"resolution must be >= 8 cells per lattice constant, got {resolution}")
    lat = spec.lattice
    dx = lat.a / resolution
    x_half, y_half, z_half = device_extent(spec, resolution)
    hx = math.ceil(x_half / dx - 1e-9)
    hy = math.ceil(y_half / dx - 1e-9)
    hz = math.ceil(z_half / dx - 1e-9)
    dims = (2 * hx + 1, 2 * hy + 1, 2 * hz + 1)
    required = 3 * dims[0] * dims[1] * dims[2] * 8
    if required > max_bytes:
        raise SizingError(required, max_bytes)

    holes = hole_centers(spec)
    nodes = [np.arange(n) - (n - 1) // 2 for n in dims]
    fz_int = _slab_fraction(nodes[2], 0.0, dx, lat.H)
    fz_half = _slab_fraction(nodes[2], 0.5, dx, lat.H)
    contrast = (lat.eps_slab - 1.0) / _SUB_IN_PLANE

    def assemble(offx, offy, fz):
        hole_xy = _hole_counts(dims[0], dims[1], hx, hy, offx, offy, dx, holes)
        solid = (_SUB_IN_PLANE - hole_xy)[:, :, None] * fz[None, None, :]
        return 1.0 + contrast * solid

    grid = PermittivityGrid(
        dims=dims,
        dx=dx,
        eps_x=assemble(0.5, 0.0, fz_int),
        eps_y=assemble(0.0, 0.5, fz_int),
        eps_z=assemble(0.0, 0.0, fz_half),
    )
    lo = min(float(c.min()) for c in grid.components())
    hi = max(float(c.max()) for c in grid.components())
    if lo < 1.0 or hi > lat.eps_slab + 1e-12:
        raise GeometryError(f"permittivity out of range [{lo}, {hi}]")
    return grid


def uniform_slab_grid(
    dims: tuple,
    dx: float,
    n: float,
    thickness: float,
) -> PermittivityGrid:
    """Unpatterned slab of index n and the given thickness, centred at z=0.

    thickness=0 gives vacuum. Useful for 1D-style validation runs and
    absorber benchmarks; shares the subpixel z-averaging of rasterize().
    """
    dims = tuple(int(d) for d in dims)
    nodes_z = np.arange(dims[2]) - (dims[2] - 1) // 2
    contrast = n**2 - 1.0

    def profile(offset):
        fz = _slab_fraction(nodes_z, offset, dx, thickness)
        eps_z_line = 1.0 + contrast * fz
        return np.broadcast_to(eps_z_line[None, None, :], dims).copy()

    eps_int = profile(0.0)
    return PermittivityGrid(
        dims=dims, dx=dx, eps_x=eps_int, eps_y=eps_int.copy(), eps_z=profile(0.5)
    )


def vacuum_grid(dims: tuple, dx: float) -> PermittivityGrid:
    """All-air grid."""
    dims = tuple(int(d) for d in dims)
    ones = np.ones(dims)
    return PermittivityGrid(dims=dims, dx=dx, eps_x=ones, eps_y=ones.copy(), eps_z=ones.copy())


def dielectric_energy_fraction(grid: PermittivityGrid, e_field) -> float:
    """Fraction of electric energy density residing in the dielectric.

    Returns sum over eps>1 samples of eps*|E|^2 divided by the total,
    accumulating each Yee component at its own sample point. Raises
    ZeroFieldError for an identically zero field.
    """
    num = 0.0
    den = 0.0
    for eps, comp in zip(grid.components(), e_field):
        if comp.shape != eps.shape:
            raise GeometryError(f"field shape {comp.shape} != grid dims {eps.shape}")
        u = eps * np.abs(comp) ** 2
        den += float(u.sum())
        num += float(u[eps > 1.0].sum())
    if den == 0.0:
        raise ZeroFieldError("cannot form a dielectric energy fraction of a zero field")
    return num / den
