"""qgeom: convex geometry of quantum states at desk scale.

Joint/separable/PPT numerical ranges, tight additive uncertainty bounds,
spectral-gap witnesses for spin chains, and group-covariant state
interconversion (U(1), Weyl-Heisenberg, SU(2)).
"""

__version__ = "0.1.0"

from . import core, entangle, gapwitness, interconvert, numrange, su2, uncertainty, wigner

__all__ = [
    "core",
    "numrange",
    "uncertainty",
    "gapwitness",
    "entangle",
    "interconvert",
    "wigner",
    "su2",
    "__version__",
]
