"""Truncated Fock-space numerics for Husimi functions, Wehrl entropy and
Gaussian quantum-limited channels."""

from wehrl.errors import (
    AccuracyError,
    DomainError,
    NotAStateError,
    PreconditionError,
    ShapeError,
    TruncationError,
)
from wehrl.fock_core import (
    CoherentAmplitude,
    DensityOperator,
    FockCutoff,
    Spectrum,
    bound_f,
    coherent_vector,
    displacement_matrix,
    fock_state,
    g,
    g_inv,
    mean_energy,
    passive_rearrangement,
    random_isospectral_state,
    schatten_norm,
    thermal_state,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CoherentAmplitude",
    "DensityOperator",
    "DomainError",
    "FockCutoff",
    "NotAStateError",
    "PreconditionError",
    "ShapeError",
    "Spectrum",
    "TruncationError",
    "bound_f",
    "coherent_vector",
    "displacement_matrix",
    "fock_state",
    "g",
    "g_inv",
    "mean_energy",
    "passive_rearrangement",
    "random_isospectral_state",
    "schatten_norm",
    "thermal_state",
    "von_neumann_entropy",
]
