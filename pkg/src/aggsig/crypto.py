"""BLS signing, aggregation and aggregate verification.

Two interchangeable backends expose the same methods:

``PairingBackend``
    Real BLS over BLS12-381.  Signatures and message hashes live in G1,
    public keys and the generator ``g`` in G2, so the verification
    equation reads ``e(sigma, g) == prod_u e(h_u, pk_u) ** c_u``.
    Group arithmetic and pairings come from ``py_arkworks_bls12381``;
    hash-to-curve is the SSWU construction from ``py_ecc``.

    Wire widths: G1 = 48 bytes and G2 = 96 bytes (zcash compressed
    encoding), G_T = 576 bytes (arkworks canonical encoding), and
    scalars = 32 bytes big-endian.

``OracleBackend``
    Bookkeeping stand-in used for large simulations.  Its source group
    is ``Z_p`` written multiplicatively with generator 1, so ``pk = sk``.
    A signature is the multiset of ``(h, signing key)`` terms that were
    multiplied into it.  Verification checks that this multiset is
    exactly ``{(h_u, pk_u): c_u}``, which is what the pairing equation
    certifies.  Its ``sigma`` wire form is a 48-byte digest of the
    multiset, so message sizes match the pairing backend.

Both backends use the BLS12-381 subgroup order (255 bits) as ``p``.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Sequence

from .vector import SignerVector, add_mod_p

CURVE_ORDER = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
HASH_DST = b"AGGSIG-GOSSIP-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_"


@dataclass(frozen=True)
class CheckpointId:
    height: int
    hash: bytes

    def __post_init__(self):
        if self.height < 0:
            raise ValueError("checkpoint height must be non-negative")
        if len(self.hash) != 32:
            raise ValueError("checkpoint hash must be 32 bytes")

    def message(self) -> bytes:
        """``height || hash``: 8-byte big-endian height then the digest."""
        return self.height.to_bytes(8, "big") + bytes(self.hash)


@dataclass(frozen=True)
class GroupParams:
    p: int
    g: Any
    backend: str
    sig_width: int
    key_width: int
    gt_width: int
    scalar_width: int = 32


@dataclass(frozen=True)
class KeyPair:
    sk: int
    pk: Any = field(repr=False)


@dataclass(frozen=True)
class PairingTable:
    """Per-checkpoint cache of ``e(h_u, pk_u)`` for every guardian ``u``."""

    checkpoint: CheckpointId
    pks: tuple
    entries: tuple

    @property
    def n(self) -> int:
        return len(self.entries)


def hash_input(pk_bytes: bytes, checkpoint: CheckpointId) -> bytes:
    """Bytes fed to the hash: 2-byte length, pk, then ``height || hash``."""
    return len(pk_bytes).to_bytes(2, "big") + pk_bytes + checkpoint.message()


def _check_lengths(c: SignerVector, table: PairingTable) -> None:
    if len(c) != table.n:
        raise ValueError(f"signer vector has {len(c)} entries, table has {table.n}")


class _Backend:
    params: GroupParams

    @property
    def p(self) -> int:
        return self.params.p

    def keygen(self, rng: random.Random) -> KeyPair:
        return self.keypair_from_secret(rng.randrange(1, self.p))

    def aggregate(self, own, incoming: Sequence = ()):
        """Multiply signatures and add vectors mod p; ``own`` is ``(sigma, c)``."""
        sigma, c = own
        for other_sigma, other_c in incoming:
            sigma = self.sig_mul(sigma, other_sigma)
            c = add_mod_p(c, other_c, self.p)
        return sigma, c

    def scalar_bytes(self, k: int) -> bytes:
        return (k % self.p).to_bytes(self.params.scalar_width, "big")


# -- real pairing backend --------------------------------------------------

def _arkworks():
    import py_arkworks_bls12381 as ark

    return ark


class PairingBackend(_Backend):
    name = "pairing"

    def __init__(self):
        ark = _arkworks()
        self._ark = ark
        self.g1 = ark.G1Point()
        self.params = GroupParams(
            p=CURVE_ORDER, g=ark.G2Point(), backend=self.name,
            sig_width=48, key_width=96, gt_width=576,
        )

    def _scalar(self, k: int):
        return self._ark.Scalar(k % self.p)

    def keypair_from_secret(self, sk: int) -> KeyPair:
        return KeyPair(sk, self.params.g * self._scalar(sk))

    def key_mul(self, a, b):
        return a + b

    def key_identity(self):
        return self._ark.G2Point.identity()

    def key_pow(self, a, k: int):
        return a * self._scalar(k)

    def identity(self):
        return self._ark.G1Point.identity()

    def sig_mul(self, a, b):
        return a + b

    def sig_pow(self, a, k: int):
        return a * self._scalar(k)

    def key_bytes(self, pk) -> bytes:
        return bytes(pk.to_compressed_bytes())

    def sig_bytes(self, sigma) -> bytes:
        return bytes(sigma.to_compressed_bytes())

    def sig_from_bytes(self, data: bytes):
        return self._ark.G1Point.from_compressed_bytes(list(data))

    def gt_bytes(self, x) -> bytes:
        return bytes.fromhex(str(x))

    def pairing(self, a, b):
        return self._ark.GT.pairing(a, b)

    def gt_one(self):
        return self._ark.GT.one()

    def gt_pow(self, x, k: int):
        k %= self.p
        result = self._ark.GT.one()
        while k:
            if k & 1:
                result = result * x
            k >>= 1
            if k:
                x = x * x
        return result

    def hash_to_group(self, pk, checkpoint: CheckpointId):
        return self._ark.G1Point.from_compressed_bytes(
            list(_hash_to_g1_bytes(hash_input(self.key_bytes(pk), checkpoint)))
        )

    def sign(self, sk: int, checkpoint: CheckpointId, pk):
        return self.hash_to_group(pk, checkpoint) * self._scalar(sk)

    def precompute_pairings(self, pks: Sequence, checkpoint: CheckpointId) -> PairingTable:
        entries = tuple(self.pairing(self.hash_to_group(pk, checkpoint), pk) for pk in pks)
        return PairingTable(checkpoint, tuple(pks), entries)

    def verify_aggregate(self, sigma, c: SignerVector, table: PairingTable) -> bool:
        _check_lengths(c, table)
        expected = self._ark.GT.one()
        for entry, count in zip(table.entries, c):
            if count:
                expected = expected * self.gt_pow(entry, count)
        return self.pairing(sigma, self.params.g) == expected

    def verify_inline(self, sigma, c: SignerVector, pks: Sequence, checkpoint: CheckpointId) -> bool:
        """Verification without a table: one multi-pairing over ``c_u * h_u``."""
        if len(c) != len(pks):
            raise ValueError("signer vector and key list differ in length")
        lhs, rhs = [], []
        for pk, count in zip(pks, c):
            if count:
                lhs.append(self.hash_to_group(pk, checkpoint) * self._scalar(count))
                rhs.append(pk)
        if not lhs:
            return sigma == self.identity()
        return self.pairing(sigma, self.params.g) == self._ark.GT.multi_pairing(lhs, rhs)

    def random_element(self, rng: random.Random):
        return self.g1 * self._scalar(rng.randrange(1, self.p))


@lru_cache(maxsize=65536)
def _hash_to_g1_bytes(data: bytes) -> bytes:
    from py_ecc.bls.hash_to_curve import hash_to_G1
    from py_ecc.bls.point_compression import compress_G1

    point = hash_to_G1(data, HASH_DST, hashlib.sha256)
    return compress_G1(point).to_bytes(48, "big")


# -- accounting oracle -----------------------------------------------------

@dataclass(frozen=True)
class OracleSignature:
    """Multiset of ``((h, signing_key), count)`` terms, counts mod p."""

    terms: tuple = ()

    def as_dict(self) -> dict:
        return dict(self.terms)


def _oracle_sig(counts: dict, p: int) -> OracleSignature:
    return OracleSignature(tuple(sorted((k, v % p) for k, v in counts.items() if v % p)))


class OracleBackend(_Backend):
    name = "oracle"

    def __init__(self):
        self.params = GroupParams(
            p=CURVE_ORDER, g=1, backend=self.name,
            sig_width=48, key_width=32, gt_width=32,
        )

    def keypair_from_secret(self, sk: int) -> KeyPair:
        return KeyPair(sk, sk % self.p)

    def key_mul(self, a, b):
        return (a + b) % self.p

    def key_identity(self):
        return 0

    def identity(self):
        return OracleSignature()

    def sig_mul(self, a: OracleSignature, b: OracleSignature) -> OracleSignature:
        counts = a.as_dict()
        for key, v in b.terms:
            counts[key] = counts.get(key, 0) + v
        return _oracle_sig(counts, self.p)

    def sig_pow(self, a: OracleSignature, k: int) -> OracleSignature:
        return _oracle_sig({key: v * k for key, v in a.terms}, self.p)

    def key_bytes(self, pk) -> bytes:
        return self.scalar_bytes(pk)

    def sig_bytes(self, sigma: OracleSignature) -> bytes:
        h = hashlib.blake2b(digest_size=48)
        for (hv, s), v in sigma.terms:
            h.update(self.scalar_bytes(hv) + self.scalar_bytes(s) + self.scalar_bytes(v))
        return h.digest()

    def hash_to_group(self, pk, checkpoint: CheckpointId) -> int:
        digest = hashlib.sha512(HASH_DST + hash_input(self.key_bytes(pk), checkpoint)).digest()
        return int.from_bytes(digest, "big") % self.p

    def sign(self, sk: int, checkpoint: CheckpointId, pk) -> OracleSignature:
        return OracleSignature((((self.hash_to_group(pk, checkpoint), sk % self.p), 1),))

    def precompute_pairings(self, pks: Sequence, checkpoint: CheckpointId) -> PairingTable:
        entries = tuple((self.hash_to_group(pk, checkpoint), pk) for pk in pks)
        return PairingTable(checkpoint, tuple(pks), entries)

    def verify_aggregate(self, sigma: OracleSignature, c: SignerVector, table: PairingTable) -> bool:
        _check_lengths(c, table)
        expected = {}
        for entry, count in zip(table.entries, c):
            if count:
                expected[entry] = (expected.get(entry, 0) + count) % self.p
        return sigma.as_dict() == {k: v for k, v in expected.items() if v}

    def random_element(self, rng: random.Random) -> OracleSignature:
        return OracleSignature(
            (((rng.randrange(self.p), rng.randrange(1, self.p)), 1),)
        )


_BACKENDS = {"pairing": PairingBackend, "oracle": OracleBackend}
_instances: dict = {}


def get_backend(name: str):
    """Shared backend instance by name (``"pairing"`` or ``"oracle"``)."""
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {sorted(_BACKENDS)}")
    if name not in _instances:
        _instances[name] = _BACKENDS[name]()
    return _instances[name]
