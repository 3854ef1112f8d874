"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: configuration problems
exit 2, geometry/sizing problems exit 3, all-points-failed sweeps exit 4,
numerical failures exit 5.
"""


class ConfigError(ValueError):
    """Invalid or malformed configuration; carries the offending field path."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class GeometryError(ValueError):
    """Geometrically invalid device (overlapping holes, footprint overflow)."""


class SizingError(GeometryError):
    """Requested grid exceeds the memory budget; carries the required bytes."""

    def __init__(self, required_bytes, budget_bytes):
        self.required_bytes = int(required_bytes)
        self.budget_bytes = int(budget_bytes)
        super().__init__(
            f"grid needs {self.required_bytes} bytes "
            f"(budget {self.budget_bytes}); raise the budget or lower the resolution"
        )


class SymmetryError(ValueError):
    """Grid or source incompatible with a requested mirror plane."""


class DivergenceError(ArithmeticError):
    """Field update produced NaN/Inf; carries step and first bad location."""

    def __init__(self, step, component, index):
        self.step = int(step)
        self.component = component
        self.index = tuple(int(i) for i in index)
        super().__init__(
            f"non-finite {component} value at cell {self.index} on step {self.step}"
        )


class ZeroFieldError(ValueError):
    """An operation whose result is undefined for an identically zero field."""


class FitError(RuntimeError):
    """Nonlinear fit failed to converge; carries the residual history."""

    def __init__(self, message, residual_history=None):
        self.residual_history = list(residual_history or [])
        super().__init__(message)


class NumericsError(RuntimeError):
    """Eigensolver or other numerical backend failure."""
