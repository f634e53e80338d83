"""causalcz: causal singular integrals, Carleson functionals and sparse
domination on the upper half-space, at desk scale and with exact dyadic
geometry."""

__version__ = "0.1.0"

from .dyadic import BoundaryCube, HalfCube, RegionKind, RegionSet  # noqa: F401
from .grid import GridFunction, Window  # noqa: F401
