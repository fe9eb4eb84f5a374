"""Finite clones, commutants, and functional distribution monads over finite rigs."""
from finclone.finset import (
    InputError,
    MultiOpTable,
    OpTable,
    ResourceError,
    constant,
    decode_tuple,
    encode_tuple,
    enumerate_constrained,
    enumerate_homs,
    projection,
    superpose,
)
from finclone.rig import FiniteRig, get_rig, load_rig, opposite, registry, validate_rig
from finclone.theory import (
    ConcreteTheory,
    TheorySlice,
    affine_core,
    clone_closure,
    full_theory,
    initial_theory,
    mat_aff_theory,
    mat_slice,
    mat_theory,
    pointed_module_slice,
    pointed_module_theory,
)
from finclone.commutant import (
    affine_commutant_check,
    commutant_slice,
    commutant_theory,
    commutes,
    is_balanced,
    is_commutative,
    is_saturated,
    mutual_commutant_check,
)
from finclone.distribution import build_context, classify, distribution_object

__all__ = [name for name in dir() if not name.startswith("_")]
