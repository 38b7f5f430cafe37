"""Exact matrices, blackbox operators, butterflies and prover-side algorithms."""

from .butterfly import (ButterflyNetwork, ButterflySwitch, butterfly_apply, butterfly_apply_block,
                        butterfly_sample, butterfly_transpose_apply, butterfly_transpose_apply_block,
                        butterfly_wiring)
from .elimination import (det_mod_p, find_nonsingular_submatrix, integer_determinant, integer_rank,
                          integer_rank_multimodular, inverse_mod_p, nullspace_basis, nullspace_vector,
                          permutation_sign, plu_mod_p, rank_mod_p, rank_profile_mod_p, solve_mod_p)
from .frobenius import (charpoly_integer, frobenius_form_integer, frobenius_form_mod_p,
                        invariant_factors_mod_p, minpoly_integer, vector_minpoly)
from .matrices import (DenseMatrix, LinearOperator, SparseMatrix, SubmatrixSelector, as_dense,
                       aslinearoperator, block_companion, companion_matrix, encode_matrix, identity,
                       mat_mul, mat_vec, matvec, reduced_operator, submatrix_operator)

__all__ = [
    "ButterflyNetwork",
    "ButterflySwitch",
    "butterfly_apply",
    "butterfly_apply_block",
    "butterfly_sample",
    "butterfly_transpose_apply",
    "butterfly_transpose_apply_block",
    "butterfly_wiring",
    "det_mod_p",
    "find_nonsingular_submatrix",
    "integer_determinant",
    "integer_rank",
    "integer_rank_multimodular",
    "inverse_mod_p",
    "nullspace_basis",
    "nullspace_vector",
    "permutation_sign",
    "plu_mod_p",
    "rank_mod_p",
    "rank_profile_mod_p",
    "solve_mod_p",
    "charpoly_integer",
    "frobenius_form_integer",
    "frobenius_form_mod_p",
    "invariant_factors_mod_p",
    "minpoly_integer",
    "vector_minpoly",
    "DenseMatrix",
    "LinearOperator",
    "SparseMatrix",
    "SubmatrixSelector",
    "as_dense",
    "aslinearoperator",
    "block_companion",
    "companion_matrix",
    "encode_matrix",
    "identity",
    "mat_mul",
    "mat_vec",
    "matvec",
    "reduced_operator",
    "submatrix_operator",
]
