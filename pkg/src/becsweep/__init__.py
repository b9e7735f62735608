"""Stimulated atom-molecule BEC conversion under a linear sweep through a
narrow resonance: conserved-sector Hamiltonians, exact transition
distributions, an independent Schrodinger-equation oracle, multi-resonance
cascade thermalization, and adiabatic cat-state analysis.
"""

__version__ = "0.1.0"

from .formulas import SweepParams, Distribution, PhaseResult
from .sectors import SectorSpec, BasisState, SectorBasis, AffineHamiltonian

__all__ = [
    "SweepParams",
    "Distribution",
    "PhaseResult",
    "SectorSpec",
    "BasisState",
    "SectorBasis",
    "AffineHamiltonian",
    "__version__",
]
