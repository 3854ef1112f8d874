"""2D plane-wave band structure for the triangular air-hole lattice.

The slab is reduced to two dimensions through the effective index of its
fundamental TE slab mode, and the TE (in-plane E) bands are solved by
plane-wave expansion: for each Bloch vector k the Hermitian eigenproblem

    sum_G' (k+G).(k+G') eta(G-G') h_G' = (w/c)^2 h_G

with eta the Fourier transform of 1/eps (the better-converging
convention for TE; building the eps matrix and inverting it is available
behind convention="direct" for cross-checks). Circular holes give the
closed-form coefficients proportional to 2 J1(|G| r)/(|G| r).

Frequencies are reported in normalized units a/lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import j1

from .errors import NumericsError

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Lattice2D:
    """Triangular lattice of circular holes, effective-medium description."""

    a: float
    r: float
    eps_bg: float
    eps_hole: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"lattice constant must be positive, got {self.a}")
        if not 0 <= self.r < self.a / 2:
            raise ValueError(f"need 0 <= r < a/2, got r={self.r}")
        if self.eps_bg < 1 or self.eps_hole < 1:
            raise ValueError("permittivities must be >= 1")

    @property
    def fill_fraction(self) -> float:
        """Hole area per unit cell: 2 pi r^2 / (sqrt(3) a^2)."""
        return 2.0 * math.pi * self.r**2 / (SQRT3 * self.a**2)


@dataclass(frozen=True)
class BandDiagram:
    """Eigenfrequencies along a k path, with detected band gaps.

    frequencies has shape (n_k, n_bands) in units a/lambda, ascending per
    row; gaps is a list of non-overlapping (lo, hi) intervals.
    """

    k_points: np.ndarray = field(repr=False)
    k_path_fraction: np.ndarray = field(repr=False)
    frequencies: np.ndarray = field(repr=False)
    gaps: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.frequencies, axis=1) < -1e-12):
            raise ValueError("per-k frequencies must be sorted ascending")
        for (lo1, hi1), (lo2, hi2) in zip(self.gaps, self.gaps[1:]):
            if hi1 > lo2:
                raise ValueError("gap intervals overlap")

    def contains(self, a_over_lambda: float) -> bool:
        return any(lo <= a_over_lambda <= hi for lo, hi in self.gaps)


def reciprocal_basis(a: float):
    b1 = 2.0 * math.pi / a * np.array([1.0, -1.0 / SQRT3])
    b2 = 2.0 * math.pi / a * np.array([0.0, 2.0 / SQRT3])
    return b1, b2


def hex_shell_count(radius: int) -> int:
    """Plane waves in a hexagonal truncation of integer radius R."""
    return 3 * radius * (radius + 1) + 1


def g_vectors(a: float, n_waves: int):
    """Smallest hexagonally truncated reciprocal set with >= n_waves points.

    Returns (g, mn) where g is (N, 2) in 1/nm and mn the integer lattice
    coordinates; N is 3R(R+1)+1 for the chosen radius R (7, 19, 37, ...,
    271 at R=9, 469 at R=12).
    """
    if n_waves < 1:
        raise ValueError("need at least one plane wave")
    radius = 0
    while hex_shell_count(radius) < n_waves:
        radius += 1
    b1, b2 = reciprocal_basis(a)
    # b1.b2 < 0 for this basis, so the hexagonal window is |m|,|n|,|m-n| <= R
    mn = [
        (m, n)
        for m in range(-radius, radius + 1)
        for n in range(-radius, radius + 1)
        if abs(m - n) <= radius
    ]
    mn = np.array(mn, dtype=int)
    g = mn[:, :1] * b1[None, :] + mn[:, 1:] * b2[None, :]
    return g, mn


def fourier_eps(lattice: Lattice2D, g, inverse: bool = False) -> np.ndarray:
    """Fourier coefficients of eps (or 1/eps) at reciprocal vectors g.

    g: (..., 2) array of reciprocal-lattice vectors. G=0 gives the
    area-weighted mean; G != 0 gives (eps_hole - eps_bg) * f *
    2 J1(|G| r)/(|G| r) for circular holes.
    """
    g = np.asarray(g, dtype=float)
    gnorm = np.linalg.norm(g, axis=-1)
    eh, eb = lattice.eps_hole, lattice.eps_bg
    if inverse:
        eh, eb = 1.0 / eh, 1.0 / eb
    f = lattice.fill_fraction
    out = np.empty(gnorm.shape)
    zero = gnorm < 1e-12
    out[zero] = f * eh + (1.0 - f) * eb
    gr = gnorm[~zero] * lattice.r
    if gr.size:
        with np.errstate(invalid="ignore"):
            shape = np.where(gr > 0, 2.0 * j1(gr) / np.where(gr > 0, gr, 1.0), 1.0)
        out[~zero] = (eh - eb) * f * shape
    return out


def default_k_path(a: float, samples_per_segment: int = 16):
    """Gamma -> M -> K -> Gamma path; returns (k_points, path_fraction, labels)."""
    b1, b2 = reciprocal_basis(a)
    gamma = np.zeros(2)
    m_pt = 0.5 * b2
    k_pt = (b1 + 2.0 * b2) / 3.0
    verts = [gamma, m_pt, k_pt, gamma]
    pts = []
    for p, q in zip(verts[:-1], verts[1:]):
        ts = np.linspace(0.0, 1.0, samples_per_segment, endpoint=False)
        pts.extend(p + t * (q - p) for t in ts)
    pts.append(verts[-1])
    pts = np.array(pts)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    frac = np.concatenate([[0.0], np.cumsum(seg)])
    frac /= frac[-1]
    return pts, frac, ("Gamma", "M", "K", "Gamma")


def _eta_matrix(lattice: Lattice2D, g, convention: str) -> np.ndarray:
    diff = g[:, None, :] - g[None, :, :]
    if convention == "inverse":
        return fourier_eps(lattice, diff, inverse=True)
    if convention == "direct":
        eps_mat = fourier_eps(lattice, diff, inverse=False)
        return np.linalg.inv(eps_mat)
    raise ValueError(f"unknown convention {convention!r}")


def te_bands(
    lattice: Lattice2D,
    n_waves: int = 271,
    k_path=None,
    samples_per_segment: int = 16,
    n_bands: int = 8,
    convention: str = "inverse",
) -> BandDiagram:
    """TE band diagram along the k path, with gap detection.

    n_waves is rounded up to a full hexagonal truncation (>= 7). Gaps are
    intervals between the maximum of one band and the minimum of the next
    over the whole path.
    """
    if n_waves < 7:
        raise ValueError(f"need n_waves >= 7, got {n_waves}")
    if k_path is None:
        k_points, frac, labels = default_k_path(lattice.a, samples_per_segment)
    else:
        k_points = np.asarray(k_path, dtype=float)
        seg = np.linalg.norm(np.diff(k_points, axis=0), axis=1)
        frac = np.concatenate([[0.0], np.cumsum(seg)])
        frac = frac / max(frac[-1], 1e-300)
        labels = ()
    g, _ = g_vectors(lattice.a, n_waves)
    eta = _eta_matrix(lattice, g, convention)

    n_bands = min(n_bands, len(g))
    freqs = np.empty((len(k_points), n_bands))
    for ik, k in enumerate(k_points):
        kg = k[None, :] + g
        dots = kg @ kg.T
        h = dots * eta
        h = 0.5 * (h + h.T)
        try:
            w = np.linalg.eigvalsh(h)
        except np.linalg.LinAlgError as err:
            raise NumericsError(f"eigensolver failed at k-point {ik}: {err}") from err
        if w[0] < -1e-10:
            raise NumericsError(
                f"negative eigenvalue {w[0]:.3e} at k-point {ik}; matrix not PSD"
            )
        freqs[ik] = np.sqrt(np.clip(w[:n_bands], 0.0, None)) * lattice.a / (2.0 * math.pi)

    gaps = []
    for b in range(n_bands - 1):
        lo = float(freqs[:, b].max())
        hi = float(freqs[:, b + 1].min())
        if hi > lo * (1.0 + 1e-9):
            gaps.append((lo, hi))
    return BandDiagram(
        k_points=k_points,
        k_path_fraction=frac,
        frequencies=freqs,
        gaps=gaps,
        metadata={
            "convention": convention,
            "n_waves": len(g),
            "labels": labels,
            "eps_bg": lattice.eps_bg,
            "eps_hole": lattice.eps_hole,
            "r_over_a": lattice.r / lattice.a,
        },
    )


def gap_map(
    lattice: Lattice2D,
    r_over_a_values,
    n_waves: int = 271,
    samples_per_segment: int = 16,
) -> list:
    """Primary TE gap (between bands 1 and 2) versus hole radius.

    Returns rows (r_over_a, gap_lo, gap_hi); rows without a gap carry
    (r_over_a, None, None).
    """
    values = list(r_over_a_values)
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("r/a samples must be monotone non-decreasing")
    rows = []
    for roa in values:
        lat = Lattice2D(
            a=lattice.a, r=roa * lattice.a, eps_bg=lattice.eps_bg, eps_hole=lattice.eps_hole
        )
        diagram = te_bands(lat, n_waves=n_waves, samples_per_segment=samples_per_segment)
        lo1 = float(diagram.frequencies[:, 0].max())
        hi1 = float(diagram.frequencies[:, 1].min())
        if hi1 > lo1 * (1.0 + 1e-9):
            rows.append((roa, lo1, hi1))
        else:
            rows.append((roa, None, None))
    return rows


def effective_index(n_slab: float, thickness: float, wavelength: float) -> float:
    """Effective index of the fundamental TE mode of a symmetric air-clad slab.

    Solves kappa*tan(kappa*H/2) = gamma with kappa = k0*sqrt(n^2 - neff^2),
    gamma = k0*sqrt(neff^2 - 1), by bisection on the first even branch.
    """
    if n_slab <= 1:
        raise ValueError("slab index must exceed 1")
    k0 = 2.0 * math.pi / wavelength
    d = thickness / 2.0

    def g(neff):
        kap = k0 * math.sqrt(max(n_slab**2 - neff**2, 0.0))
        gam = k0 * math.sqrt(max(neff**2 - 1.0, 0.0))
        return gam - kap * math.tan(kap * d)

    # first even branch: kappa*d in (0, pi/2)
    lo = math.sqrt(max(n_slab**2 - (math.pi / (2 * k0 * d)) ** 2, 1.0)) if d > 0 else 1.0
    lo = max(lo, 1.0) + 1e-9
    hi = n_slab - 1e-12
    if g(hi) <= 0:
        raise NumericsError("no guided TE mode found (slab too thin?)")
    return float(brentq(g, lo, hi, xtol=1e-12, rtol=1e-14))
