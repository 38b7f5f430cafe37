"""Determinant, characteristic polynomial, Frobenius form and rank over Z.

Each certificate commits to an integer object and is checked modulo a
prime the verifier picks after the commitment.
"""

from certilin.cert_integer import (charpoly_prove, charpoly_verify, committed_factors, determinant_prove,
                                   determinant_verify, frobenius_prove, frobenius_verify,
                                   integer_rank_prove, integer_rank_verify, minpoly_from_frobenius)

A = [[2, 1, 0, 0],
     [0, 2, 0, 0],
     [0, 0, 2, 0],
     [0, 0, 0, 3]]

t = determinant_prove(A, k=2)
print("det:", t.rounds[0]["commitment"]["delta"], determinant_verify(A, t).accepted)

t = charpoly_prove(A, k=3)
v = charpoly_verify(A, t)
print("charpoly:", t.rounds[0]["commitment"]["g"], v.accepted, "error <=", float(v.soundness_error_bound))

t = frobenius_prove(A)
v = frobenius_verify(A, t)
print("invariant factors:", committed_factors(t), v.accepted)
print("minimal polynomial:", minpoly_from_frobenius(t, v))

B = [[1, 2], [2, 4]]
t = integer_rank_prove(B, k=2)
print("rank of", B, "=", t.rounds[0]["commitment"]["rank"], integer_rank_verify(B, t).accepted,
      "(prime", t.rounds[0]["challenge"]["prime"]["value"] + ")")
