from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from aggsig.chain import (
    FINALIZED,
    PENDING,
    SKIPPED,
    FinalizationLedger,
    LedgerError,
    build_chain,
    checkpoints,
    first_broken_link,
    is_prefix_closed,
    record_finalization,
    verify_integrity,
)


def flip(b: bytes, i: int = 0) -> bytes:
    return b[:i] + bytes([b[i] ^ 1]) + b[i + 1:]


def test_genesis_only():
    chain = build_chain(1, 0)
    assert len(chain) == 1 and chain[0].height == 0
    assert checkpoints(chain) == []


def test_checkpoint_heights():
    chain = build_chain(201, 3)
    cps = checkpoints(chain, 100)
    assert [c.height for c in cps] == [100, 200]
    assert cps[1].hash == chain[200].hash()


def test_same_seed_same_chain():
    assert build_chain(50, 9) == build_chain(50, 9)
    assert build_chain(50, 9) != build_chain(50, 10)


def test_fresh_chain_verifies():
    assert verify_integrity(build_chain(120, 1))


def test_corrupted_link_detected():
    chain = build_chain(20, 1)
    chain[5] = replace(chain[5], prev_hash=flip(chain[5].prev_hash))
    assert not verify_integrity(chain)
    assert first_broken_link(chain) == 5


def test_corrupted_payload_breaks_next_link():
    chain = build_chain(20, 1)
    chain[5] = replace(chain[5], payload_digest=flip(chain[5].payload_digest, 7))
    assert first_broken_link(chain) == 6
    assert verify_integrity(chain[:6])


@given(st.integers(1, 30), st.data())
def test_corruption_is_local(i, data):
    """Corrupting block i is caught using blocks i-1, i, i+1 only."""
    chain = build_chain(32, 4)
    field = data.draw(st.sampled_from(["prev_hash", "payload_digest"]))
    pos = data.draw(st.integers(0, 31))
    chain[i] = replace(chain[i], **{field: flip(getattr(chain[i], field), pos)})
    window = chain[i - 1:i + 2]
    ok = all(window[k].prev_hash == window[k - 1].hash() for k in range(1, len(window)))
    assert not ok
    assert first_broken_link(chain) == (i if field == "prev_hash" else i + 1)


def test_finalize_in_order():
    led = FinalizationLedger(100)
    led = record_finalization(led, 100, FINALIZED, b"a")
    led = record_finalization(led, 200, FINALIZED, b"b")
    assert led.status(100) == led.status(200) == FINALIZED
    assert led.finalized_blocks() == range(201)


def test_leapfrog_skips_pending():
    led = record_finalization(FinalizationLedger(100), 100, PENDING)
    assert led.status(100) == PENDING and not led.is_block_finalized(0)
    led = record_finalization(led, 200, FINALIZED, b"b")
    assert led.status(100) == SKIPPED
    assert led.is_block_finalized(150) and led.is_block_finalized(200)
    assert not led.is_block_finalized(201)


def test_late_pending_below_finalized_is_skipped():
    led = record_finalization(FinalizationLedger(100), 300, FINALIZED, b"c")
    led = record_finalization(led, 200, PENDING)
    assert led.status(200) == SKIPPED


def test_finalized_checkpoint_is_immutable():
    led = record_finalization(FinalizationLedger(100), 200, FINALIZED, b"b")
    assert record_finalization(led, 200, FINALIZED, b"b") is led
    with pytest.raises(LedgerError):
        record_finalization(led, 200, FINALIZED, b"x")
    with pytest.raises(LedgerError):
        record_finalization(led, 200, PENDING)


def test_bad_heights_rejected():
    with pytest.raises(ValueError):
        record_finalization(FinalizationLedger(100), 150, FINALIZED, b"a")
    with pytest.raises(ValueError):
        record_finalization(FinalizationLedger(100), 100, "maybe")


@given(st.lists(st.tuples(st.integers(1, 12), st.booleans()), max_size=40))
def test_finalized_set_is_always_a_prefix(events):
    led = FinalizationLedger(10)
    for k, fin in events:
        h = 10 * k
        try:
            led = record_finalization(led, h, FINALIZED if fin else PENDING, b"same")
        except LedgerError:
            assert led.status(h) == FINALIZED
            continue
        assert is_prefix_closed(led)
        top = led.finalized_height()
        if top is not None:
            assert all(led.status(x) in (FINALIZED, SKIPPED) for x in led.statuses if x <= top)
            assert led.finalized_blocks() == range(top + 1)
