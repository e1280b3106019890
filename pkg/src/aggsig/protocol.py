"""Per-guardian state machine of the aggregated signature gossip loop.

One loop iteration is split across two calls so a round engine can run
all guardians in lock step:

* ``outgoing`` is the send at the top of the iteration.
* ``receive_and_step`` covers everything after it: the break when
  already finalized, collecting the inbox, verifying, aggregating,
  counting signers and finalizing.

A guardian that finalizes in iteration ``t`` still gossips in ``t + 1``
and then leaves the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Optional, Sequence

import numpy as np

from .crypto import CheckpointId, KeyPair, PairingTable
from .vector import (
    DecodeError,
    SignerVector,
    decode_compact,
    decode_varint,
    encode_compact,
    encode_varint,
    init_signer_vector,
    unique_signers,
)

THRESHOLD_RULES = ("strict", "loose")


class CounterWrapError(AssertionError):
    """An honest signer counter wrapped to zero modulo p."""


def finalization_threshold(n: int, rule: str = "strict") -> int:
    """Signers needed to finalize.

    ``"strict"`` means more than two thirds, ``floor(2n/3) + 1``.
    ``"loose"`` is ``s >= 2n/3``, i.e. ``ceil(2n/3)``.  That
    one is kept only to show how it breaks safety.
    """
    if n < 1:
        raise ValueError("need at least one guardian")
    if rule == "strict":
        return 2 * n // 3 + 1
    if rule == "loose":
        return math.ceil(2 * n / 3)
    raise ValueError(f"unknown threshold rule {rule!r}")


@dataclass(frozen=True)
class GossipMessage:
    sender: int
    checkpoint: CheckpointId
    sigma: Any
    vector: bytes

    def to_bytes(self, backend) -> bytes:
        return (
            encode_varint(self.sender)
            + self.checkpoint.message()
            + backend.sig_bytes(self.sigma)
            + self.vector
        )

    def size(self, backend) -> int:
        return message_size(self.sender, len(self.vector), backend.params.sig_width)


def message_size(sender: int, vector_bytes: int, sig_width: int) -> int:
    """Serialized length of a message; see ``GossipMessage.to_bytes``."""
    return len(encode_varint(sender)) + 40 + sig_width + vector_bytes


def decode_message(data: bytes, backend, n: int) -> GossipMessage:
    """Parse wire bytes.  Only the pairing backend has a decodable sigma."""
    if backend.name != "pairing":
        raise ValueError("oracle signatures cannot be recovered from wire bytes")
    sender, pos = decode_varint(data, 0)
    if len(data) < pos + 40 + backend.params.sig_width:
        raise DecodeError("message truncated")
    height = int.from_bytes(data[pos:pos + 8], "big")
    digest = bytes(data[pos + 8:pos + 40])
    pos += 40
    width = backend.params.sig_width
    try:
        sigma = backend.sig_from_bytes(data[pos:pos + width])
    except Exception as exc:
        raise DecodeError(f"bad signature encoding: {exc}") from exc
    vector = bytes(data[pos + width:])
    decode_compact(vector, n, backend.p)
    return GossipMessage(sender, CheckpointId(height, digest), sigma, vector)


@dataclass(frozen=True)
class GuardianState:
    index: int
    n: int
    keypair: KeyPair
    checkpoint: CheckpointId
    sigma: Any
    c: SignerVector
    neighbors: frozenset
    iterations: int
    t: int = 0
    finalized: bool = False
    finalized_round: Optional[int] = None
    exited: bool = False
    break_on_finalize: bool = True


@dataclass(frozen=True)
class StepReport:
    verified: int = 0
    discarded: int = 0
    dropped: int = 0
    signers: int = 0
    max_entry: int = 0


def init_guardian(
    i: int,
    n: int,
    keypair: KeyPair,
    neighbors,
    checkpoint: CheckpointId,
    backend,
    iterations: int,
    break_on_finalize: bool = True,
) -> GuardianState:
    if not 0 <= i < n:
        raise IndexError(f"guardian index {i} out of range for n={n}")
    return GuardianState(
        index=i,
        n=n,
        keypair=keypair,
        checkpoint=checkpoint,
        sigma=backend.sign(keypair.sk, checkpoint, keypair.pk),
        c=init_signer_vector(i, n, backend.p),
        neighbors=frozenset(neighbors),
        iterations=iterations,
        break_on_finalize=break_on_finalize,
    )


def outgoing(state: GuardianState) -> Optional[GossipMessage]:
    if state.exited or state.t >= state.iterations:
        return None
    return GossipMessage(state.index, state.checkpoint, state.sigma, encode_compact(state.c))


def _valid_pair(msg: GossipMessage, state: GuardianState, table: PairingTable, backend):
    try:
        c = decode_compact(msg.vector, state.n, backend.p)
    except DecodeError:
        return None
    if unique_signers(c) == 0:
        return None
    try:
        ok = backend.verify_aggregate(msg.sigma, c, table)
    except (ValueError, TypeError):
        return None
    return (msg.sigma, c) if ok else None


def receive_and_step(
    state: GuardianState,
    inbox: Sequence[GossipMessage],
    table: PairingTable,
    threshold: int,
    backend,
) -> tuple[GuardianState, StepReport]:
    if state.exited or state.t >= state.iterations:
        return state, StepReport(dropped=len(inbox))
    if state.finalized and state.break_on_finalize:
        return replace(state, exited=True), StepReport(
            dropped=len(inbox), signers=unique_signers(state.c), max_entry=state.c.max_entry()
        )

    seen = set()
    valid = []
    discarded = 0
    for msg in inbox:
        if msg.sender in seen or msg.sender not in state.neighbors:
            discarded += 1
            continue
        seen.add(msg.sender)
        pair = _valid_pair(msg, state, table, backend)
        if pair is None:
            discarded += 1
        else:
            valid.append(pair)

    sigma, c = backend.aggregate((state.sigma, state.c), valid)
    if np.any((state.c.entries != 0) & (c.entries == 0)):
        raise CounterWrapError(f"guardian {state.index}: a signer counter wrapped to 0 mod p")
    s = unique_signers(c)
    t = state.t + 1
    newly = not state.finalized and s >= threshold
    new_state = replace(
        state,
        sigma=sigma,
        c=c,
        t=t,
        finalized=state.finalized or newly,
        finalized_round=t if newly else state.finalized_round,
    )
    return new_state, StepReport(
        verified=len(valid), discarded=discarded, signers=s, max_entry=c.max_entry()
    )
