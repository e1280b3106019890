"""Multi-instance scenarios: equivocation safety and checkpoint sequences."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..chain import (
    DEFAULT_INTERVAL,
    FINALIZED,
    PENDING,
    FinalizationLedger,
    build_chain,
    checkpoints,
    is_prefix_closed,
    record_finalization,
    verify_integrity,
)
from ..crypto import CheckpointId, get_backend
from ..protocol import finalization_threshold, init_guardian, outgoing, receive_and_step
from .config import Partition, SimConfig, default_iterations
from .engine import SimRun, make_keys, run_simulation
from .topology import NetworkTopology, generate_topology

_TAG_SPLIT = 0x5AFE


# -- equivocation ----------------------------------------------------------

@dataclass
class SafetyReport:
    n: int
    seed: int
    byzantine: frozenset
    camp_a: frozenset
    camp_b: frozenset
    threshold: int
    finalized_a: int
    finalized_b: int
    max_signers_a: int
    max_signers_b: int
    foreign_signers: int
    partitions: tuple = field(default=(), repr=False)

    @property
    def violation(self) -> bool:
        """Both conflicting hashes finalized by some honest guardian."""
        return self.finalized_a > 0 and self.finalized_b > 0


def safety_harness(
    n: int,
    degree: float,
    byz_count: int,
    camp_a_size: int,
    seed: int,
    partitions: Sequence[Partition] = (),
    threshold_rule: str = "strict",
    backend: str = "oracle",
    iterations: Optional[int] = None,
    topology: Optional[NetworkTopology] = None,
) -> SafetyReport:
    """Two protocol instances for conflicting hashes at one height.

    Byzantine guardians sign both hashes and relay in both instances.  They
    never stop, and each honest neighbor gets whichever instance's
    aggregate it will accept.  Honest guardians sign only their camp's
    hash.  Messages for the other hash fail verification and are
    discarded.
    """
    if byz_count > n // 3:
        raise ValueError("at most a third of the guardians may be byzantine")
    if not 0 <= camp_a_size <= n - byz_count:
        raise ValueError("camp A larger than the honest population")
    crypto = get_backend(backend)
    if topology is None:
        topology = NetworkTopology.complete(n) if degree >= n - 1 else generate_topology(n, degree, seed)
    L = iterations if iterations is not None else default_iterations(n, max(degree, 2))
    thr = finalization_threshold(n, threshold_rule)

    order = np.random.default_rng([seed, _TAG_SPLIT]).permutation(n).tolist()
    byz = frozenset(order[:byz_count])
    camp_a = frozenset(order[byz_count:byz_count + camp_a_size])
    camp_b = frozenset(order[byz_count + camp_a_size:])

    height = DEFAULT_INTERVAL
    cps = {
        side: CheckpointId(height, hashlib.sha256(f"aggsig-equivocation:{seed}:{side}".encode()).digest())
        for side in "AB"
    }
    keys = make_keys(n, seed, crypto)
    pks = [k.pk for k in keys]
    tables = {side: crypto.precompute_pairings(pks, cp) for side, cp in cps.items()}

    def start(i, side, stop):
        return init_guardian(i, n, keys[i], topology.neighbors[i], cps[side], crypto, L, stop)

    honest = {i: (start(i, "A" if i in camp_a else "B", True), "A" if i in camp_a else "B")
              for i in range(n) if i not in byz}
    twins = {i: {side: start(i, side, False) for side in "AB"} for i in byz}

    for r in range(1, L + 1):
        masks = [p.side_mask(n) for p in partitions if p.active(r)]
        inbox_h: dict = {i: [] for i in honest}
        inbox_b: dict = {(i, s): [] for i in byz for s in "AB"}
        out_h = {i: outgoing(st) for i, (st, _) in honest.items()}
        out_b = {i: {s: outgoing(st) for s, st in pair.items()} for i, pair in twins.items()}
        for i in range(n):
            for j in topology.neighbors[i]:
                if any(m[i] != m[j] for m in masks):
                    continue
                if i in honest:
                    msg = out_h[i]
                    if msg is None:
                        continue
                    if j in honest:
                        inbox_h[j].append(msg)
                    else:
                        inbox_b[(j, honest[i][1])].append(msg)
                elif j in honest:
                    msg = out_b[i][honest[j][1]]
                    if msg is not None:
                        inbox_h[j].append(msg)
                else:
                    for s in "AB":
                        if out_b[i][s] is not None:
                            inbox_b[(j, s)].append(out_b[i][s])
        for i, (st, side) in honest.items():
            honest[i] = (receive_and_step(st, inbox_h[i], tables[side], thr, crypto)[0], side)
        for i, pair in twins.items():
            for s in "AB":
                pair[s] = receive_and_step(pair[s], inbox_b[(i, s)], tables[s], thr, crypto)[0]
        if all(st.exited for st, _ in honest.values()):
            break

    allowed = {"A": camp_a | byz, "B": camp_b | byz}
    fin = {"A": 0, "B": 0}
    top = {"A": 0, "B": 0}
    foreign = 0
    for st, side in honest.values():
        signers = set(np.flatnonzero(st.c.entries).tolist())
        foreign += len(signers - allowed[side])
        top[side] = max(top[side], len(signers))
        fin[side] += int(st.finalized)
    return SafetyReport(
        n, seed, byz, camp_a, camp_b, thr, fin["A"], fin["B"],
        top["A"], top["B"], foreign, tuple(partitions),
    )


def random_safety_scenario(seed: int, threshold_rule: str = "strict") -> SafetyReport:
    """One randomized equivocation run: size, split, topology and partitions vary."""
    rng = np.random.default_rng([seed, 0x5CE7])
    n = int(rng.integers(4, 41))
    degree = int(rng.integers(2, min(8, n - 1) + 1))
    f = int(rng.integers(0, n // 3 + 1))
    a = int(rng.integers(0, n - f + 1))
    partitions = ()
    if rng.random() < 0.5:
        start = int(rng.integers(1, 4))
        end = start + int(rng.integers(0, 4))
        side = frozenset(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
        partitions = (Partition(start, end, side),)
    return safety_harness(n, degree, f, a, seed, partitions, threshold_rule)


# -- checkpoint sequences --------------------------------------------------

@dataclass
class SequenceResult:
    runs: list
    ledgers: dict
    prefix_closed: bool


def run_checkpoint_sequence(
    config: SimConfig,
    chain,
    interval: int = DEFAULT_INTERVAL,
    topology: Optional[NetworkTopology] = None,
) -> SequenceResult:
    """Finalize every checkpoint of ``chain`` in order on one network.

    Instance ``k`` occupies global rounds ``k*L + 1 .. (k+1)*L``.  The
    config's partition schedule is read on that global clock.  Each honest
    guardian keeps its own ledger.
    """
    if not verify_integrity(chain):
        raise ValueError("chain fails the local integrity check")
    if topology is None:
        topology = generate_topology(config.n, config.degree, config.seed)
    runs: list[SimRun] = []
    ledgers: dict = {}
    prefix_closed = True
    for k, cp in enumerate(checkpoints(chain, interval)):
        run = run_simulation(config, topology, cp, round_offset=k * config.rounds)
        runs.append(run)
        for i in np.flatnonzero(run.honest).tolist():
            ledger = ledgers.get(i, FinalizationLedger(interval))
            outcome = FINALIZED if run.finalized_round[i] >= 0 else PENDING
            ledgers[i] = record_finalization(ledger, cp.height, outcome, cp.hash)
            prefix_closed &= is_prefix_closed(ledgers[i])
    return SequenceResult(runs, ledgers, prefix_closed)


def leapfrog_scenario(
    seed: int = 0,
    n: int = 40,
    degree: float = 10,
    iterations: int = 3,
    interval: int = DEFAULT_INTERVAL,
) -> SequenceResult:
    """Checkpoints ``T`` and ``2T``, with a 50/50 split during the first instance.

    The split covers rounds 1-3, i.e. all of checkpoint ``T``'s instance.
    The network heals in time for ``2T``, whose finalization skips ``T``.
    """
    chain = build_chain(2 * interval + 1, seed)
    config = SimConfig(
        n=n, degree=degree, iterations=iterations, seed=seed,
        partitions=(Partition.halves(1, iterations, n),),
    )
    return run_checkpoint_sequence(config, chain, interval)
