"""cmclab: numerical laboratory for constant-mean-curvature graphs.

The package solves the Dirichlet problem for the prescribed-mean-curvature
graph equation div(grad u / W) = 2H on planar domains, provides exact
radial comparison solutions, and analyzes solution sequences for the
circle arcs of curvature 2H along which gradients blow up.
"""

from .errors import (
    CmcLabError,
    ConfigError,
    DomainError,
    NumericsError,
    ParameterError,
    PartialCoverageError,
    RangeError,
)

__version__ = "0.1.0"

__all__ = [
    "CmcLabError",
    "ConfigError",
    "DomainError",
    "NumericsError",
    "ParameterError",
    "PartialCoverageError",
    "RangeError",
    "__version__",
]
