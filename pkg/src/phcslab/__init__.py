"""Photonic-crystal slab nanocavity toolkit.

Subpackages: geometry (devices and permittivity grids), fdtd (3D Yee
solver with CPML and mirror symmetries), analysis (resonance extraction,
mode volume, Purcell factor), bands (2D plane-wave band structure), cli
(command-line pipeline).
"""

__version__ = "0.1.0"

from . import errors
from .geometry import (
    DeviceSpec,
    HeterostructureParams,
    L3Params,
    PermittivityGrid,
    SlabLattice,
    dielectric_energy_fraction,
    hole_centers,
    rasterize,
)

__all__ = [
    "errors",
    "DeviceSpec",
    "HeterostructureParams",
    "L3Params",
    "PermittivityGrid",
    "SlabLattice",
    "dielectric_energy_fraction",
    "hole_centers",
    "rasterize",
    "__version__",
]
