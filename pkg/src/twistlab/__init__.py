"""Exact lattice vertex superalgebras, twisted vertex operators, and
classification of simple twisted modules."""

from .scalar import (
    CycScalar,
    ScalarError,
    ConductorOverflow,
    canonical_root,
    parse_scalar,
    root_of_unity,
)
from .lattice import LatticeError, OrbitDecomposition, TwistedLattice
from .cocycle import CocycleError, TwistData, build_epsilon, locality_order
from .fdist import (
    FdistError,
    GenSeries,
    KernelPoly,
    LieAlg,
    QuadraticSpace,
    kernel_Delta,
    kernel_F,
    locality_test,
    nth_product,
    nth_product_kernel,
    series_compare,
    verify_axioms,
)
from .fock import (
    FockError,
    FockModule,
    GenericOmega,
    RegularOmega,
    e_group_checks,
    heisenberg_commutation_check,
    pair_expansion_check,
    product_check,
    reconstruct_e,
    virasoro_element_checks,
)
from .classify import (
    ClassifyError,
    UnsupportedScalar,
    build_algebra_A,
    decompose_A,
    enumerate_simple_twisted,
    instantiate_class,
    twisted_conditions,
)
from .oracle import (
    OracleError,
    oracle_bicharacter_blocks,
    oracle_dual_coset_count,
    oracle_product,
)

__all__ = [
    "CycScalar",
    "ScalarError",
    "ConductorOverflow",
    "canonical_root",
    "parse_scalar",
    "root_of_unity",
    "LatticeError",
    "OrbitDecomposition",
    "TwistedLattice",
    "CocycleError",
    "TwistData",
    "build_epsilon",
    "locality_order",
    "FdistError",
    "GenSeries",
    "KernelPoly",
    "LieAlg",
    "QuadraticSpace",
    "kernel_Delta",
    "kernel_F",
    "locality_test",
    "nth_product",
    "nth_product_kernel",
    "series_compare",
    "verify_axioms",
    "FockError",
    "FockModule",
    "GenericOmega",
    "RegularOmega",
    "e_group_checks",
    "heisenberg_commutation_check",
    "pair_expansion_check",
    "product_check",
    "reconstruct_e",
    "virasoro_element_checks",
    "ClassifyError",
    "UnsupportedScalar",
    "build_algebra_A",
    "decompose_A",
    "enumerate_simple_twisted",
    "instantiate_class",
    "twisted_conditions",
    "OracleError",
    "oracle_bicharacter_blocks",
    "oracle_dual_coset_count",
    "oracle_product",
]
