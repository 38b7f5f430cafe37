"""The two building blocks of the rank certificate, one at a time."""

import random

from certilin.cert_field import nonsingular_prove, nonsingular_verify, rank_upper_prove, rank_upper_verify
from certilin.errors import ProtocolAbort
from certilin.linalg.butterfly import butterfly_sample

p = 10007
rng = random.Random(1)

# non-singularity: the verifier picks b, the prover must solve A w = b
A = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
b = [rng.randrange(p) for _ in range(3)]
w = nonsingular_prove(A, b, p)
print("A w = b accepted:", nonsingular_verify(A, b, w, p).accepted)

# on a singular matrix a random b is almost never in the column space
S = [[1, 2, 3], [2, 4, 6], [1, 1, 1]]
try:
    nonsingular_prove(S, b, p)
except ProtocolAbort as exc:
    print("singular input, prover gives up:", exc)

# rank upper bound: after random butterflies the leading (r+1) block is singular
U, V = butterfly_sample(3, p, rng), butterfly_sample(3, p, rng)
w = rank_upper_prove(S, 2, U, V, p)
print("rank(S) <= 2 accepted:", rank_upper_verify(S, 2, U, V, w, p).accepted)
try:
    rank_upper_prove(S, 1, U, V, p)
except ProtocolAbort:
    print("rank(S) <= 1 cannot be certified (the true rank is 2)")
