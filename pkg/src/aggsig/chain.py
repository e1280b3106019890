"""Hash-linked block headers and the checkpoint finalization ledger."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .crypto import CheckpointId

DEFAULT_INTERVAL = 100
GENESIS_PARENT = bytes(32)

PENDING = "pending"
FINALIZED = "finalized"
SKIPPED = "skipped"


class LedgerError(ValueError):
    """Attempt to rewrite a finalized checkpoint."""


@dataclass(frozen=True)
class BlockHeader:
    height: int
    prev_hash: bytes
    payload_digest: bytes

    def serialize(self) -> bytes:
        return self.height.to_bytes(8, "big") + self.prev_hash + self.payload_digest

    def hash(self) -> bytes:
        return hashlib.sha256(self.serialize()).digest()


def build_chain(length: int, rng: random.Random | int) -> list[BlockHeader]:
    """Genesis plus ``length - 1`` linked headers with random payloads."""
    if length < 1:
        raise ValueError("chain length must be at least 1")
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    chain = []
    prev = GENESIS_PARENT
    for height in range(length):
        header = BlockHeader(height, prev, rng.randbytes(32))
        chain.append(header)
        prev = header.hash()
    return chain


def first_broken_link(chain: Sequence[BlockHeader]) -> Optional[int]:
    """Height of the first header whose parent link or height is wrong."""
    for i, header in enumerate(chain):
        if header.height != i:
            return i
        expected = GENESIS_PARENT if i == 0 else chain[i - 1].hash()
        if header.prev_hash != expected:
            return i
    return None


def verify_integrity(chain: Sequence[BlockHeader]) -> bool:
    return first_broken_link(chain) is None


def checkpoints(chain: Sequence[BlockHeader], interval: int = DEFAULT_INTERVAL) -> list[CheckpointId]:
    return [
        CheckpointId(h.height, h.hash())
        for h in chain
        if h.height > 0 and h.height % interval == 0
    ]


@dataclass(frozen=True)
class FinalizationLedger:
    """Checkpoint statuses of one guardian.

    Finalizing checkpoint ``k*T`` finalizes every block at or below it,
    so earlier checkpoints that never finalized are marked skipped.
    """

    interval: int = DEFAULT_INTERVAL
    statuses: dict = field(default_factory=dict)
    hashes: dict = field(default_factory=dict)

    def status(self, height: int) -> Optional[str]:
        return self.statuses.get(height)

    def finalized_height(self) -> Optional[int]:
        done = [h for h, s in self.statuses.items() if s == FINALIZED]
        return max(done) if done else None

    def is_block_finalized(self, height: int) -> bool:
        top = self.finalized_height()
        return top is not None and height <= top

    def finalized_blocks(self) -> range:
        top = self.finalized_height()
        return range(0) if top is None else range(top + 1)


def record_finalization(
    ledger: FinalizationLedger,
    checkpoint_height: int,
    outcome: str,
    checkpoint_hash: Optional[bytes] = None,
) -> FinalizationLedger:
    """Return a new ledger with ``outcome`` (pending or finalized) recorded."""
    if checkpoint_height % ledger.interval:
        raise ValueError(f"height {checkpoint_height} is not a multiple of {ledger.interval}")
    if outcome not in (PENDING, FINALIZED):
        raise ValueError(f"unknown outcome {outcome!r}")
    statuses = dict(ledger.statuses)
    hashes = dict(ledger.hashes)
    current = statuses.get(checkpoint_height)

    if current == FINALIZED:
        if outcome != FINALIZED or hashes.get(checkpoint_height) != checkpoint_hash:
            raise LedgerError(f"checkpoint {checkpoint_height} is already finalized")
        return ledger

    if outcome == PENDING:
        statuses[checkpoint_height] = SKIPPED if ledger.is_block_finalized(checkpoint_height) else PENDING
    else:
        statuses[checkpoint_height] = FINALIZED
        hashes[checkpoint_height] = checkpoint_hash
        for h, s in statuses.items():
            if h < checkpoint_height and s == PENDING:
                statuses[h] = SKIPPED
    return FinalizationLedger(ledger.interval, statuses, hashes)


def is_prefix_closed(ledger: FinalizationLedger) -> bool:
    """No pending checkpoint sits below the highest finalized one."""
    top = ledger.finalized_height()
    if top is None:
        return SKIPPED not in ledger.statuses.values()
    return all(s != PENDING for h, s in ledger.statuses.items() if h <= top) and all(
        s == PENDING for h, s in ledger.statuses.items() if h > top
    )
