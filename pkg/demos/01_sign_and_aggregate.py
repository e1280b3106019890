"""
Signing, aggregating and verifying on BLS12-381
===============================================

Four guardians sign one checkpoint.  Their signatures are folded into a
single G1 point, and the signer vector records how often each one went in.
"""

import hashlib
import random

from aggsig.crypto import CheckpointId, get_backend
from aggsig.vector import SignerVector, init_signer_vector, encode_compact

be = get_backend("pairing")
cp = CheckpointId(100, hashlib.sha256(b"block at height 100").digest())

keys = [be.keygen(random.Random(f"demo:{i}")) for i in range(4)]
table = be.precompute_pairings([k.pk for k in keys], cp)

# each guardian starts with its own signature and a unit vector
own = [(be.sign(k.sk, cp, k.pk), init_signer_vector(i, 4, be.p)) for i, k in enumerate(keys)]

# guardian 0 hears from 1 and 2, guardian 3 hears from 0 and 2
sigma_a, c_a = be.aggregate(own[0], [own[1], own[2]])
sigma_b, c_b = be.aggregate(own[3], [own[0], own[2]])
print("A:", c_a.tolist(), be.verify_aggregate(sigma_a, c_a, table))
print("B:", c_b.tolist(), be.verify_aggregate(sigma_b, c_b, table))

# merging overlapping aggregates double-counts, which the vector tracks
sigma, c = be.aggregate((sigma_a, c_a), [(sigma_b, c_b)])
print("A+B:", c.tolist(), be.verify_aggregate(sigma, c, table))

# the same equation without the table, as one multi-pairing
print("inline:", be.verify_inline(sigma, c, [k.pk for k in keys], cp))

# claim one signature too many, or swap the point: both fail
bumped = SignerVector([c[0] + 1] + c.tolist()[1:], be.p)
print("bumped vector:", be.verify_aggregate(sigma, bumped, table))
print("wrong point:", be.verify_aggregate(be.sig_mul(sigma, be.g1), c, table))

# on the wire the vector is a few varint bytes, the point 48
print("wire bytes:", len(encode_compact(c)), "+", len(be.sig_bytes(sigma)))
