"""Exact-arithmetic toolkit for central complex hyperplane arrangements."""

from .field import CyclotomicField, FieldElement, Matrix, field_make, mat_kernel, mat_rref
from .core import (
    Arrangement,
    Hyperplane,
    arr_add,
    arr_delete,
    arr_is_essential,
    arr_is_irreducible,
    arr_key,
    arr_localize,
    arr_parse,
    arr_product,
    arr_rank,
    arr_restrict,
    arr_serialize,
)
from .lattice import (
    CharPoly,
    IntersectionLattice,
    charpoly,
    flat_join,
    is_modular,
    is_supersolvable,
    lattice_build,
    rank2_profile,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
