"""Exact Gibbs probabilities and certified high-temperature cluster expansions
for lattice interaction models."""

from .errors import CertificateRefusedError, InvalidInputError, ResourceGuardError
from .expansion import Family, thermodynamic_probability
from .exactgibbs import gibbs_probability
from .model import CylinderEvent, build_custom, build_ising, build_potts

__all__ = [
    "CertificateRefusedError",
    "CylinderEvent",
    "Family",
    "InvalidInputError",
    "ResourceGuardError",
    "build_custom",
    "build_ising",
    "build_potts",
    "gibbs_probability",
    "thermodynamic_probability",
]
