"""Type-I down-conversion pumped by Bessel-Gauss beams in uniaxial crystals."""

from .optics import CrystalConfig, DerivedIndices, DomainError, PumpBeam, derived_indices
from .phasematch import PhaseMatchSpec
from .quad import QuadratureSpec

__version__ = "0.1.0"
