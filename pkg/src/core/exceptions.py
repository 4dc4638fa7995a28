"""
Error types shared by every pipeline stage.
The CLI maps each family to an exit code (see src/cli/main.py).
"""


class MGSError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(MGSError, ValueError):
    """Invalid configuration value or command-line flag."""


class DomainError(MGSError, ValueError):
    """Argument outside the domain of a geometric or physical function."""


class ShapeError(MGSError, ValueError):
    """Heatmap grids or pose arrays that should agree do not."""


class HeatmapFormatError(MGSError, ValueError):
    """File is not a readable MGSH heatmap."""


class HeatmapWriteError(MGSError, OSError):
    """Heatmap could not be written."""

    def __init__(self, path, reason):
        super().__init__(f"Cannot write heatmap to {path}: {reason}")
        self.path = path


class RenderError(DomainError):
    """A scatterer lies outside the grid coverage."""

    def __init__(self, joint: str, reason: str):
        super().__init__(f"Joint '{joint}' cannot be rendered: {reason}")
        self.joint = joint


class FitError(MGSError, RuntimeError):
    """Optimization diverged."""

    def __init__(self, iteration: int, reason: str):
        super().__init__(f"Fit failed at iteration {iteration}: {reason}")
        self.iteration = iteration


class SceneError(MGSError, ValueError):
    """Synthetic scene leaves the grid coverage."""

    def __init__(self, frame: int, reason: str):
        super().__init__(f"Scene invalid at frame {frame}: {reason}")
        self.frame = frame


class MetricError(MGSError, ValueError):
    """Metric undefined for the given poses."""


class OracleError(MGSError, ArithmeticError):
    """Finite-difference evaluation produced a non-finite value."""
