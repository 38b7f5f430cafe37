"""Signature and positive semidefiniteness from a certified charpoly.

A symmetric matrix has only real eigenvalues, so Descartes' rule of signs
on the characteristic polynomial counts them exactly.
"""

from certilin.cert_integer import charpoly_prove, signature_verify

for A in ([[2, 1], [1, 2]], [[1, -2], [-2, 1]], [[1, 1, 0], [1, 1, 0], [0, 0, 5]]):
    s = signature_verify(A, charpoly_prove(A, k=2))
    print(A, "->", s.as_dict())
