"""Certify the rank of a sparse matrix over Z_p, watching the verifier's cost.

The verifier only ever touches A through matrix-vector products: one for
the lower bound (an r x r non-singular block) and one for the upper bound
(butterfly-preconditioned kernel vector).  Full-rank inputs skip the
second product.
"""

import random

from certilin.cert_field import rank_prove, rank_verify
from certilin.linalg import SparseMatrix, aslinearoperator

p = 2**31 - 1
rng = random.Random(0)
n = 200

# rows only use 150 of the 200 columns, so the rank is at most 150
cols = rng.sample(range(n), 150)
entries = {(i, j): rng.randrange(1, p) for i in range(n) for j in rng.sample(cols, 5)}
A = aslinearoperator(SparseMatrix(n, n, [(i, j, v) for (i, j), v in entries.items()]), modulus=p)

cert = rank_prove(A, p)
print("claimed rank:", cert.r)
v = rank_verify(A, cert, p)
print("accepted:", v.accepted)
print("matvecs:", v.cost.matvec_count, " scalar ops:", v.cost.scalar_op_count, " nnz:", A.source.nnz())
print("soundness error bound per round:", v.soundness_error_bound)

# a full-rank matrix needs a single product
I = aslinearoperator(SparseMatrix(n, n, [(i, i, 1) for i in range(n)]), modulus=p)
v = rank_verify(I, rank_prove(I, p), p)
print("identity: matvecs =", v.cost.matvec_count)
