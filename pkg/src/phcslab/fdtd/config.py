"""Simulation configuration types for the Yee solver.

Internally the solver is nondimensionalized: lengths in cells (dx = 1),
time in cell transit times (c = 1, so dt = courant), fields in arbitrary
units. All configuration surfaces speak nm and fs; conversion happens at
the boundary using the grid's dx.

Symmetry convention: the per-axis parity label names the parity of the
electric-field components PARALLEL to that mirror plane. A TE-like slab
mode is "even" across the z midplane. The L3/heterostructure fundamental
mode sector is x: even, y: odd, z: even with a y-polarized dipole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..analysis import C_NM_FS
from ..errors import ConfigError, SymmetryError
from ..geometry import PermittivityGrid

COURANT_LIMIT_3D = 1.0 / math.sqrt(3.0)

E_COMPONENTS = ("ex", "ey", "ez")
H_COMPONENTS = ("hx", "hy", "hz")
COMPONENTS = E_COMPONENTS + H_COMPONENTS

# Yee sample offsets in units of dx: E components sit half a cell along
# their own axis, H components half a cell along both perpendicular axes.
OFFSETS = {
    "ex": (0.5, 0.0, 0.0),
    "ey": (0.0, 0.5, 0.0),
    "ez": (0.0, 0.0, 0.5),
    "hx": (0.0, 0.5, 0.5),
    "hy": (0.5, 0.0, 0.5),
    "hz": (0.5, 0.5, 0.0),
}

_PARITIES = ("none", "even", "odd")


@dataclass(frozen=True)
class CpmlParams:
    """Convolutional PML profile: thickness in cells, polynomial order m,
    and profile maxima. sigma_max=None selects the standard grading
    optimum 0.8*(m+1)/dx. thickness=0 disables the absorber (PEC walls).
    """

    thickness: int = 10
    m: float = 4.0
    sigma_max: Optional[float] = None
    kappa_max: float = 3.0
    alpha_max: float = 0.05

    def __post_init__(self):
        if self.thickness != 0 and self.thickness < 6:
            raise ConfigError(
                f"absorber needs thickness 0 (disabled) or >= 6 cells, got {self.thickness}",
                path="cpml.thickness",
            )
        if self.m < 1:
            raise ConfigError(f"grading order must be >= 1, got {self.m}", path="cpml.m")
        if self.sigma_max is not None and self.sigma_max <= 0:
            raise ConfigError("sigma_max must be positive", path="cpml.sigma_max")
        if self.kappa_max < 1:
            raise ConfigError("kappa_max must be >= 1", path="cpml.kappa_max")
        if self.alpha_max < 0:
            raise ConfigError("alpha_max must be >= 0", path="cpml.alpha_max")

    def resolved_sigma_max(self) -> float:
        """Grid units (dx = 1, c = 1)."""
        if self.sigma_max is not None:
            return self.sigma_max
        return 0.8 * (self.m + 1.0)


@dataclass(frozen=True)
class SymmetrySpec:
    """Mirror settings for the planes through the device centre."""

    x: str = "none"
    y: str = "none"
    z: str = "none"

    def __post_init__(self):
        for axis in ("x", "y", "z"):
            v = getattr(self, axis)
            if v not in _PARITIES:
                raise ConfigError(
                    f"parity must be one of {_PARITIES}, got {v!r}", path=f"symmetry.{axis}"
                )

    def parity(self, axis: int) -> int:
        """0 = no mirror, +1 even tangential E, -1 odd tangential E."""
        v = getattr(self, "xyz"[axis])
        return {"none": 0, "even": 1, "odd": -1}[v]

    @property
    def active_axes(self) -> tuple:
        return tuple(i for i in range(3) if self.parity(i) != 0)


def component_parity(component: str, axis: int, tangential_parity: int) -> int:
    """Parity of a field component under a mirror on `axis`.

    tangential_parity is the SymmetrySpec label (+-1) for the E components
    parallel to the plane. E perpendicular flips relative to that; H
    parities are opposite to the E component of the same orientation.
    """
    own = "xyz".index(component[1])
    if component in E_COMPONENTS:
        return -tangential_parity if own == axis else tangential_parity
    return tangential_parity if own == axis else -tangential_parity


@dataclass(frozen=True)
class SourceSpec:
    """Gaussian-pulse soft source added to one field component.

    position in nm; center_wavelength/bandwidth in nm (bandwidth is the
    FWHM of the field spectrum); amplitude arbitrary; cutoff in fs after
    which the source is exactly off (default 10 envelope widths, i.e.
    2x the envelope peak time). plane_normal extends the point source to
    a uniform sheet across the given axis for plane-wave launches.
    """

    position: tuple
    component: str = "ey"
    center_wavelength: float = 637.0
    bandwidth: float = 50.0
    amplitude: float = 1.0
    cutoff: Optional[float] = None
    plane_normal: Optional[str] = None

    def __post_init__(self):
        if self.component not in COMPONENTS:
            raise ConfigError(f"unknown component {self.component!r}", path="source.component")
        if self.center_wavelength <= 0 or self.bandwidth <= 0:
            raise ConfigError("wavelength and bandwidth must be positive", path="source")
        if self.plane_normal is not None and self.plane_normal not in ("x", "y", "z"):
            raise ConfigError("plane_normal must be x, y or z", path="source.plane_normal")
        f0 = C_NM_FS / self.center_wavelength
        # Gaussian field spectrum exp(-2 pi^2 tau^2 (f - f0)^2) must be
        # negligible at f = 0
        dc = math.exp(-2.0 * math.pi**2 * self.tau**2 * f0**2)
        if dc > 1e-8:
            raise ConfigError(
                f"pulse leaks {dc:.2e} of its peak to zero frequency; "
                "narrow the bandwidth or raise the carrier",
                path="source.bandwidth",
            )

    @property
    def f0(self) -> float:
        return C_NM_FS / self.center_wavelength

    @property
    def tau(self) -> float:
        """Envelope width in fs from the spectral FWHM."""
        df = C_NM_FS * self.bandwidth / self.center_wavelength**2
        return math.sqrt(2.0 * math.log(2.0)) / (math.pi * df)

    @property
    def peak_time(self) -> float:
        return 5.0 * self.tau

    @property
    def resolved_cutoff(self) -> float:
        return 2.0 * self.peak_time if self.cutoff is None else self.cutoff

    def waveform(self, t_fs) -> np.ndarray:
        """Source value at time t (fs); exactly zero after the cutoff."""
        t = np.asarray(t_fs, dtype=float)
        arg = t - self.peak_time
        env = self.amplitude * np.exp(-(arg**2) / (2.0 * self.tau**2))
        out = env * np.cos(2.0 * math.pi * self.f0 * arg)
        return np.where(t <= self.resolved_cutoff, out, 0.0)


@dataclass(frozen=True)
class MonitorSpec:
    """Field monitor: point time series, plane snapshot or volume snapshot.

    position in nm (point: all three; plane: the coordinate along `normal`
    is used). decimation: record every N steps (snapshots default to the
    final step only when decimation is 0).
    """

    kind: str = "point"
    position: tuple = (0.0, 0.0, 0.0)
    components: tuple = ("ey",)
    normal: str = "z"
    decimation: int = 1
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("point", "plane", "volume"):
            raise ConfigError(f"unknown monitor kind {self.kind!r}", path="monitor.kind")
        for c in self.components:
            if c not in COMPONENTS:
                raise ConfigError(f"unknown component {c!r}", path="monitor.components")
        if self.decimation < 0:
            raise ConfigError("decimation must be >= 0", path="monitor.decimation")
        if self.normal not in ("x", "y", "z"):
            raise ConfigError("normal must be x, y or z", path="monitor.normal")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything a run needs: grid, stepping, absorbers, symmetry, I/O."""

    grid: PermittivityGrid
    steps: int
    courant: float = 0.5
    cpml: CpmlParams = field(default_factory=CpmlParams)
    symmetry: SymmetrySpec = field(default_factory=SymmetrySpec)
    sources: tuple = ()
    monitors: tuple = ()
    periodic: tuple = (False, False, False)
    reduction: tuple = ()  # ((axis, parity), ...) set by apply_symmetry

    def __post_init__(self):
        if not 0 < self.courant <= COURANT_LIMIT_3D + 1e-15:
            raise ConfigError(
                f"Courant factor must satisfy 0 < S <= 1/sqrt(3), got {self.courant}",
                path="simulation.courant",
            )
        if self.steps < 0:
            raise ConfigError("steps must be >= 0", path="simulation.steps")
        for i, per in enumerate(self.periodic):
            if per and self.symmetry.parity(i) != 0:
                raise SymmetryError(f"axis {'xyz'[i]} cannot be both periodic and mirrored")
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "monitors", tuple(self.monitors))

    @property
    def dt(self) -> float:
        """Grid units (dx = 1, c = 1)."""
        return self.courant

    @property
    def dt_fs(self) -> float:
        return self.courant * self.grid.dx / C_NM_FS

    def with_(self, **kw) -> "SimulationConfig":
        return replace(self, **kw)
