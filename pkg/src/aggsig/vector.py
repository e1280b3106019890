"""Signer vectors and their compact wire encoding.

A signer vector has one counter per guardian, reduced modulo the group
order ``p``.  Entry ``u`` says how many times guardian ``u``'s signature
has been folded into the aggregate that travels with the vector.

Wire format
-----------
``encode_compact`` writes the ``n`` entries in index order, each as an
unsigned LEB128 varint: little-endian groups of 7 bits, high bit set on
every byte except the last.  There is no length prefix (the receiver
knows ``n``) and no run-length pass.  Encodings are canonical: a
multi-byte varint may not end in a ``0x00`` byte, so every vector has
exactly one encoding.

Examples: ``0 -> 00``, ``1 -> 01``, ``127 -> 7f``, ``128 -> 80 01``,
``300 -> ac 02``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

# Entries below this bound are held in int64 arrays; a sum of two such
# entries cannot overflow.  Anything larger falls back to Python ints.
_INT64_SAFE = 1 << 62
_VARINT_STEPS = tuple(np.uint64(1) << np.uint64(7 * k) for k in range(1, 10))


class DecodeError(ValueError):
    """Raised for truncated, overlong or out-of-range encodings."""


def _as_entries(values, p: int) -> np.ndarray:
    # Python ints past int64 would otherwise be inferred as float64 and rounded.
    arr = values if isinstance(values, np.ndarray) else np.array(list(values), dtype=object)
    if arr.dtype.kind == "f":
        raise ValueError("signer vector entries must be integers")
    if arr.ndim != 1:
        raise ValueError("signer vector must be one-dimensional")
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if arr.dtype != object and np.issubdtype(arr.dtype, np.integer):
        lo, hi = int(arr.min()), int(arr.max())
    else:
        as_int = [int(v) for v in arr.tolist()]
        lo, hi = min(as_int), max(as_int)
        arr = np.array(as_int, dtype=object)
    if lo < 0 or hi >= p:
        raise ValueError(f"signer vector entries must lie in [0, {p})")
    if hi < _INT64_SAFE:
        out = arr.astype(np.int64)
    else:
        out = np.array([int(v) for v in arr.tolist()], dtype=object)
    out.flags.writeable = False
    return out


class SignerVector:
    """Immutable vector of ``n`` counters in ``[0, p)``."""

    __slots__ = ("entries", "p")

    def __init__(self, entries, p: int):
        self.p = int(p)
        self.entries = _as_entries(entries, self.p)

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, u: int) -> int:
        return int(self.entries[u])

    def __iter__(self):
        return (int(v) for v in self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SignerVector):
            return NotImplemented
        return (
            self.p == other.p
            and self.n == other.n
            and bool(np.all(self.entries == other.entries))
        )

    def __hash__(self):
        return hash((self.p, tuple(self.tolist())))

    def __repr__(self) -> str:
        if self.n <= 12:
            body = ", ".join(str(v) for v in self.tolist())
        else:
            body = f"n={self.n}, signers={unique_signers(self)}, max={self.max_entry()}"
        return f"SignerVector({body})"

    def tolist(self) -> list[int]:
        return [int(v) for v in self.entries.tolist()]

    def max_entry(self) -> int:
        return int(self.entries.max()) if self.n else 0


def init_signer_vector(i: int, n: int, p: int) -> SignerVector:
    """Unit vector for guardian ``i``: entry ``i`` is 1, the rest 0."""
    if not 0 <= i < n:
        raise IndexError(f"guardian index {i} out of range for n={n}")
    entries = np.zeros(n, dtype=np.int64)
    entries[i] = 1
    return SignerVector(entries, p)


def zero_vector(n: int, p: int) -> SignerVector:
    return SignerVector(np.zeros(n, dtype=np.int64), p)


def _check_compatible(a: SignerVector, b: SignerVector, p: int) -> None:
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} != {b.n}")
    if a.p != p or b.p != p:
        raise ValueError("signer vectors use a different modulus")


def add_mod_p(a: SignerVector, b: SignerVector, p: int | None = None) -> SignerVector:
    """Entrywise ``(a + b) mod p``."""
    p = a.p if p is None else int(p)
    _check_compatible(a, b, p)
    if a.entries.dtype == np.int64 and b.entries.dtype == np.int64:
        total = a.entries + b.entries
        if p < _INT64_SAFE:
            total %= p
        elif int(total.max(initial=0)) >= p:
            total = np.array([int(v) % p for v in total.tolist()], dtype=object)
        return SignerVector(total, p)
    total = [(int(x) + int(y)) % p for x, y in zip(a.entries.tolist(), b.entries.tolist())]
    return SignerVector(total, p)


def sum_mod_p(vectors: Iterable[SignerVector], p: int) -> SignerVector:
    """Fold ``add_mod_p`` over a non-empty sequence of vectors."""
    it = iter(vectors)
    try:
        acc = next(it)
    except StopIteration:
        raise ValueError("sum_mod_p needs at least one vector") from None
    for v in it:
        acc = add_mod_p(acc, v, p)
    return acc


def scale_mod_p(c: SignerVector, k: int) -> SignerVector:
    """Entrywise ``(k * c) mod p``."""
    p = c.p
    return SignerVector([(int(v) * k) % p for v in c.entries.tolist()], p)


def unique_signers(c: SignerVector) -> int:
    """Number of guardians with a nonzero counter."""
    return int(np.count_nonzero(c.entries))


# -- varints ---------------------------------------------------------------

def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varint values must be non-negative")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(buf: bytes | Sequence[int], pos: int = 0) -> tuple[int, int]:
    """Decode one canonical varint at ``pos``; return ``(value, next_pos)``."""
    value = 0
    shift = 0
    start = pos
    while True:
        if pos >= len(buf):
            raise DecodeError("truncated varint")
        byte = buf[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        shift += 7
        if not byte & 0x80:
            if byte == 0 and pos - start > 1:
                raise DecodeError("non-canonical varint (trailing zero group)")
            return value, pos


def varint_lengths(values: np.ndarray) -> np.ndarray:
    """Encoded byte length of every entry of an integer array (any shape)."""
    arr = np.asarray(values)
    if arr.dtype == object:
        flat = [max(1, -(-int(v).bit_length() // 7)) for v in arr.ravel().tolist()]
        return np.array(flat, dtype=np.int64).reshape(arr.shape)
    u = arr.astype(np.uint64, copy=False)
    lengths = np.ones(u.shape, dtype=np.int64)
    top = u.max(initial=np.uint64(0))
    for step in _VARINT_STEPS:
        if top < step:
            break
        lengths += u >= step
    return lengths


def encoded_length(c: SignerVector | np.ndarray) -> int | np.ndarray:
    """Byte length of ``encode_compact``; row-wise for 2-D arrays."""
    entries = c.entries if isinstance(c, SignerVector) else np.asarray(c)
    lengths = varint_lengths(entries)
    if lengths.ndim == 1:
        return int(lengths.sum())
    return lengths.sum(axis=-1)


def encode_compact(c: SignerVector) -> bytes:
    entries = c.entries
    if entries.dtype == object:
        return b"".join(encode_varint(int(v)) for v in entries.tolist())
    u = entries.astype(np.uint64)
    nb = varint_lengths(u)
    out = np.empty(int(nb.sum()), dtype=np.uint8)
    starts = np.cumsum(nb) - nb
    for k in range(int(nb.max(initial=0))):
        sel = nb > k
        byte = ((u[sel] >> np.uint64(7 * k)) & np.uint64(0x7F)).astype(np.uint8)
        byte[nb[sel] > k + 1] |= 0x80
        out[starts[sel] + k] = byte
    return out.tobytes()


def _decode_slow(data: bytes, n: int, p: int) -> SignerVector:
    values = []
    pos = 0
    for _ in range(n):
        value, pos = decode_varint(data, pos)
        values.append(value)
    if pos != len(data):
        raise DecodeError(f"{len(data) - pos} trailing bytes after {n} entries")
    if any(v >= p for v in values):
        raise DecodeError("entry not reduced modulo p")
    return SignerVector(values, p)


def decode_compact(data: bytes, n: int, p: int) -> SignerVector:
    """Inverse of ``encode_compact``; raises ``DecodeError`` on malformed input."""
    b = np.frombuffer(bytes(data), dtype=np.uint8)
    ends = np.flatnonzero((b & 0x80) == 0)
    if len(ends) != n or (n and ends[-1] != len(b) - 1) or (n == 0 and len(b)):
        raise DecodeError(f"expected {n} varints in {len(b)} bytes, found {len(ends)}")
    if n == 0:
        return zero_vector(0, p)
    starts = np.empty(n, dtype=np.int64)
    starts[0] = 0
    starts[1:] = ends[:-1] + 1
    lens = ends - starts + 1
    if np.any((lens > 1) & (b[ends] == 0)):
        raise DecodeError("non-canonical varint (trailing zero group)")
    if int(lens.max()) > 8:
        return _decode_slow(bytes(data), n, p)
    vals = np.zeros(n, dtype=np.int64)
    for k in range(int(lens.max())):
        sel = lens > k
        vals[sel] |= (b[starts[sel] + k].astype(np.int64) & 0x7F) << (7 * k)
    if int(vals.max()) >= p:
        raise DecodeError("entry not reduced modulo p")
    return SignerVector(vals, p)
