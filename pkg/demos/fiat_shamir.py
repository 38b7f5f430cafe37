"""Non-interactive certificates: challenges come from hashing the input and
the prover's messages, so a transcript can be checked later by anyone.
"""

import json

from certilin.linalg import aslinearoperator
from certilin.protocol import BBSGenerator, Transcript, get_protocol, prove, replay_verify

p = 10007
A = aslinearoperator([[1, 2, 3], [2, 4, 6], [0, 1, 1]], modulus=p)
t = prove(get_protocol("rank").honest_prover(), "rank", A, 2, params={"p": p})
text = t.to_json()
print(f"transcript: {len(text)} bytes, seal {t.seal[:16]}...")
print("replay:", replay_verify(Transcript.from_json(text), A).failed_check or "accepted")

# change one entry of the first response: the second round's challenge was
# hashed from it, so the recorded challenge no longer matches
d = json.loads(text)
w = d["rounds"][0]["response"]["response"]["w_lower"]
w[0] = str((int(w[0]) + 1) % p)
print("tampered w_lower[0]:", replay_verify(Transcript.from_dict(d), A).failed_check)

# the same statement against a different matrix
B = aslinearoperator([[1, 2, 3], [2, 4, 7], [0, 1, 1]], modulus=p)
print("other matrix:", replay_verify(t, B).failed_check)

# a Blum-Blum-Shub stream can stand in for the hash
g = BBSGenerator(77, 2, 2)
print("BBS bits:", [g.next_bit() for _ in range(8)])
t = prove(get_protocol("charpoly").honest_prover(), "charpoly", [[2, 1], [1, 3]], 1, mode="fs-bbs")
print("fs-bbs charpoly:", replay_verify(t, [[2, 1], [1, 3]]).accepted)
