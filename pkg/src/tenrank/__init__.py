"""Exact computation and certification of rank parameters of order-3 tensors
over prime finite fields and the rationals."""

from .engine import (
    BoundsReport,
    SubrankCertificate,
    asymptotic_bounds,
    compute_n_threshold,
    mamu_cube,
    narrow_certificate,
    slicerank_exact,
    subrank_c2,
    subrank_exact,
    subrank_from_minrank,
    two_direction_square,
)
from .fields import GF, QQ, Field, PrimeField, RationalField, parse_field
from .laurent import (
    Degeneration,
    LaurentMatrix,
    apply_degeneration,
    border_le_qi_extract,
    mamu_border_lb,
    verify_degeneration,
)
from .matrix import Matrix, RrefResult, concat_cols, rank, rref
from .pivots import (
    PivotData,
    all_rho,
    is_pivot_matched,
    pivot_basis,
    pivot_of,
    pivot_uncertainty_check,
    rho_degeneration,
    rho_ij,
    rho_sigma,
    sqrt_certificate,
)
from .spans import (
    SliceSpan,
    diagonalize_principal,
    flanders_check,
    high_rank_slice,
    max_rank_exhaustive,
    max_rank_randomized,
    min_rank_exhaustive,
    mincov_exhaustive,
    minrk_diag_pipeline,
    mixed_kron_set,
    slice_span,
    span_of,
    staircase,
)
from .tensor import (
    CatalogEntry,
    Restriction,
    Tensor3,
    apply_restriction,
    catalog,
    catalog_entry,
    check_concise_format,
    concise_reduce,
    verify_restriction,
)

__all__ = [
    "GF", "QQ", "Field", "PrimeField", "RationalField", "parse_field",
    "Matrix", "RrefResult", "concat_cols", "rank", "rref",
    "Tensor3", "Restriction", "apply_restriction", "verify_restriction",
    "catalog", "catalog_entry", "CatalogEntry", "check_concise_format",
    "concise_reduce",
    "SliceSpan", "span_of", "slice_span", "max_rank_exhaustive",
    "max_rank_randomized", "min_rank_exhaustive", "mincov_exhaustive",
    "flanders_check", "staircase", "high_rank_slice",
    "diagonalize_principal", "minrk_diag_pipeline", "mixed_kron_set",
    "PivotData", "pivot_of", "pivot_basis", "rho_sigma", "rho_ij", "all_rho",
    "pivot_uncertainty_check", "is_pivot_matched", "rho_degeneration",
    "sqrt_certificate",
    "LaurentMatrix", "Degeneration", "apply_degeneration",
    "verify_degeneration", "border_le_qi_extract", "mamu_border_lb",
    "SubrankCertificate", "BoundsReport", "subrank_exact", "slicerank_exact",
    "subrank_from_minrank", "subrank_c2", "two_direction_square", "mamu_cube",
    "narrow_certificate", "compute_n_threshold", "asymptotic_bounds",
]
