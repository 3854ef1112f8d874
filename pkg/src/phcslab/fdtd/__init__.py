"""3D Yee FDTD solver with CPML absorbers and mirror-symmetry reduction."""

from .config import (
    COURANT_LIMIT_3D,
    CpmlParams,
    MonitorSpec,
    SimulationConfig,
    SourceSpec,
    SymmetrySpec,
    component_parity,
)
from .core import (
    DftVolume,
    FieldState,
    Simulation,
    apply_symmetry,
    cpml_reflection_test,
    new_state,
    run,
    step,
)
from .kernels import BACKEND

__all__ = [
    "BACKEND",
    "COURANT_LIMIT_3D",
    "CpmlParams",
    "DftVolume",
    "FieldState",
    "MonitorSpec",
    "Simulation",
    "SimulationConfig",
    "SourceSpec",
    "SymmetrySpec",
    "apply_symmetry",
    "component_parity",
    "cpml_reflection_test",
    "new_state",
    "run",
    "step",
]
