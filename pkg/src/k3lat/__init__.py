"""Exact lattice computations for rational isometries of K3-type lattices."""

from .exactlinalg import Matrix, hermite_normal_form, smith_normal_form
from .isometry import (
    InvariantError,
    QuotientStructure,
    RationalIsometry,
    cartan_dieudonne,
    cyclic_type,
    quotient_structure,
    reflection,
)
from .lattices import Lattice, k3_lattice, signature, standard_lattice
from .mukai import MukaiVector, mukai_pairing, sheaf_isometry_domain, verify_universal_example
from .orbits import UCanonicalPair, double_orbit_reduce, u_double_orbit_canonical

__all__ = [
    "InvariantError", "Lattice", "Matrix", "MukaiVector", "QuotientStructure",
    "RationalIsometry", "UCanonicalPair", "cartan_dieudonne", "cyclic_type",
    "double_orbit_reduce", "hermite_normal_form", "k3_lattice", "mukai_pairing",
    "quotient_structure", "reflection", "sheaf_isometry_domain", "signature",
    "smith_normal_form", "standard_lattice", "u_double_orbit_canonical",
    "verify_universal_example",
]
