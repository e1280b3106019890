"""Synchronous round engine.

Every round is two-phase.  First each live guardian produces its
outgoing message and messages are delivered along graph edges, except
edges cut by an active partition.  Then every honest guardian runs its
receive step on what arrived.  A run stops after round ``L``, or earlier
once every honest guardian has left its loop.

Two engines produce identical ``SimRun`` records:

* ``nodes`` drives ``protocol.GuardianState`` objects one by one and
  works with either crypto backend.
* ``matrix`` keeps all honest signer vectors as rows of one integer
  matrix.  A round then becomes a single sparse product.  It is only
  valid on the oracle backend, where honest aggregates always verify
  and forged ones never do.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..chain import DEFAULT_INTERVAL
from ..crypto import CheckpointId, get_backend
from ..protocol import GossipMessage, init_guardian, outgoing, receive_and_step
from ..vector import SignerVector, encode_compact, encoded_length, varint_lengths
from .config import SimConfig
from .topology import NetworkTopology, generate_topology

_TAG_BYZ = 0xB12
_TAG_FAKE = 0xFA4E
_INT64_LIMIT = 1 << 62


@dataclass(frozen=True)
class RoundStats:
    round: int
    messages_sent: int
    bytes_sent: int
    verified: int
    discarded: int
    dropped: int
    finalized_honest: int
    max_message_bytes: int
    max_entry: np.ndarray = field(repr=False)

    def key(self) -> tuple:
        return (
            self.round, self.messages_sent, self.bytes_sent, self.verified,
            self.discarded, self.dropped, self.finalized_honest,
            self.max_message_bytes, tuple(int(v) for v in self.max_entry),
        )


@dataclass
class SimRun:
    config: SimConfig
    topology: NetworkTopology = field(repr=False)
    checkpoint: CheckpointId = field(repr=False)
    behaviors: dict
    rounds: list = field(repr=False)
    finalized_round: np.ndarray = field(repr=False)
    msgs_sent: np.ndarray = field(repr=False)
    bytes_sent: np.ndarray = field(repr=False)
    signers: np.ndarray = field(repr=False)
    max_entry: int = 0
    max_message_bytes: int = 0
    trajectory: Optional[list] = field(default=None, repr=False)
    engine: str = "nodes"
    # Final honest GuardianStates; kept by the nodes engine only.
    states: Optional[dict] = field(default=None, repr=False)

    @property
    def honest(self) -> np.ndarray:
        mask = np.ones(self.config.n, dtype=bool)
        mask[list(self.behaviors)] = False
        return mask

    @property
    def convergence_round(self) -> Optional[int]:
        """First round at which every honest guardian is finalized."""
        rounds = self.finalized_round[self.honest]
        if rounds.size == 0 or np.any(rounds < 0):
            return None
        return int(rounds.max())

    @property
    def converged(self) -> bool:
        return self.convergence_round is not None

    def honest_msgs(self) -> np.ndarray:
        return self.msgs_sent[self.honest]

    def honest_bytes(self) -> np.ndarray:
        return self.bytes_sent[self.honest]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(repr(replace(self.config, engine="auto")).encode())
        h.update(repr(self.topology.neighbors).encode())
        h.update(repr(sorted(self.behaviors.items())).encode())
        for rs in self.rounds:
            h.update(repr(rs.key()).encode())
        for arr in (self.finalized_round, self.msgs_sent, self.bytes_sent, self.signers):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        h.update(repr((self.max_entry, self.max_message_bytes)).encode())
        return h.hexdigest()


def derive_rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *tags])


def assign_byzantine(config: SimConfig) -> dict:
    """Map byzantine guardian index to its behavior."""
    rng = derive_rng(config.seed, _TAG_BYZ)
    nodes = sorted(rng.choice(config.n, size=config.num_byzantine, replace=False).tolist())
    if config.behavior != "mixed":
        return {i: config.behavior for i in nodes}
    flips = rng.permutation(len(nodes))
    return {i: ("silent" if k % 2 == 0 else "fake") for i, k in zip(nodes, flips)}


def fake_vector(seed: int, node: int, rnd: int, n: int) -> np.ndarray:
    """Claimed signer vector of a forged message: counts 0-3, own entry nonzero.

    Roughly three quarters of the entries are nonzero, so the forgery always
    claims enough signers to finalize.
    """
    v = derive_rng(seed, _TAG_FAKE, node, rnd).integers(0, 4, size=n)
    v[node] = max(int(v[node]), 1)
    return v


def default_checkpoint(seed: int) -> CheckpointId:
    digest = hashlib.sha256(b"aggsig-checkpoint:" + int(seed).to_bytes(8, "big")).digest()
    return CheckpointId(DEFAULT_INTERVAL, digest)


def make_keys(n: int, seed: int, backend) -> list:
    return [backend.keygen(random.Random(f"aggsig-key:{seed}:{i}")) for i in range(n)]


def _cut_masks(config: SimConfig, rnd: int) -> list:
    return [p.side_mask(config.n) for p in config.partitions if p.active(rnd)]


def _header_bytes(n: int, sig_width: int) -> np.ndarray:
    return varint_lengths(np.arange(n)) + 40 + sig_width


def run_simulation(
    config: SimConfig,
    topology: Optional[NetworkTopology] = None,
    checkpoint: Optional[CheckpointId] = None,
    round_offset: int = 0,
) -> SimRun:
    """Run one checkpoint instance.

    ``round_offset`` shifts the round clock that partition schedules are
    matched against, so a sequence of checkpoints can share one schedule.
    """
    if topology is None:
        if config.n == 1:
            topology = NetworkTopology(1, ((),))
        else:
            topology = generate_topology(config.n, config.degree, config.seed)
    if topology.n != config.n:
        raise ValueError("topology size does not match config")
    checkpoint = checkpoint or default_checkpoint(config.seed)
    behaviors = assign_byzantine(config)
    engine = config.engine
    if engine == "auto":
        matrix_ok = config.backend == "oracle" and "inflate" not in behaviors.values()
        engine = "matrix" if matrix_ok else "nodes"
    if engine == "matrix":
        if config.backend != "oracle" or "inflate" in behaviors.values():
            raise ValueError("matrix engine needs the oracle backend and no inflation attack")
        return _run_matrix(config, topology, checkpoint, round_offset, behaviors)
    return _run_nodes(config, topology, checkpoint, round_offset, behaviors)


def _trajectory_row_matrix(states, n: int):
    rows = []
    for i in range(n):
        rows.append(states[i].c.entries if i in states else np.zeros(n, dtype=np.int64))
    if any(r.dtype == object for r in rows):
        return np.array([[int(v) for v in r.tolist()] for r in rows], dtype=object)
    return np.vstack(rows) if rows else np.zeros((0, 0), dtype=np.int64)


def _run_nodes(config, topo, checkpoint, offset, behaviors) -> SimRun:
    backend = get_backend(config.backend)
    n, L, p = config.n, config.rounds, backend.p
    keys = make_keys(n, config.seed, backend)
    table = backend.precompute_pairings([k.pk for k in keys], checkpoint)
    states = {
        i: init_guardian(i, n, keys[i], topo.neighbors[i], checkpoint, backend, L, config.break_on_finalize)
        for i in range(n)
        if i not in behaviors
    }
    inflated = {
        i: backend.sign(keys[i].sk, checkpoint, keys[i].pk)
        for i, kind in behaviors.items()
        if kind == "inflate"
    }
    thr = config.threshold
    msgs_sent = np.zeros(n, dtype=np.int64)
    bytes_sent = np.zeros(n, dtype=np.int64)
    finalized_round = np.full(n, -1, dtype=np.int64)
    trajectory = [_trajectory_row_matrix(states, n)] if config.record_trajectory else None
    rounds = []
    overall_max_msg = 0

    for r in range(1, L + 1):
        masks = _cut_masks(config, offset + r)
        inbox: dict = {}
        sent = total_bytes = max_msg = 0
        for i in range(n):
            kind = behaviors.get(i)
            if kind is None:
                msg = outgoing(states[i])
            elif kind == "fake":
                vec = SignerVector(fake_vector(config.seed, i, r, n), p)
                sigma = backend.random_element(random.Random(f"aggsig-fake:{config.seed}:{i}:{r}"))
                msg = GossipMessage(i, checkpoint, sigma, encode_compact(vec))
            elif kind == "inflate":
                k = config.inflation_factor % p
                vec = SignerVector([k if u == i else 0 for u in range(n)], p)
                msg = GossipMessage(i, checkpoint, backend.sig_pow(inflated[i], k), encode_compact(vec))
            else:
                msg = None
            if msg is None:
                continue
            nbrs = topo.neighbors[i]
            size = msg.size(backend)
            msgs_sent[i] += len(nbrs)
            bytes_sent[i] += size * len(nbrs)
            sent += len(nbrs)
            total_bytes += size * len(nbrs)
            if kind is None:
                max_msg = max(max_msg, size)
            for j in nbrs:
                if any(m[i] != m[j] for m in masks):
                    continue
                inbox.setdefault(j, []).append(msg)

        verified = discarded = dropped = 0
        for i, state in states.items():
            new_state, rep = receive_and_step(state, inbox.get(i, ()), table, thr, backend)
            if new_state.finalized_round is not None and finalized_round[i] < 0:
                finalized_round[i] = new_state.finalized_round
            states[i] = new_state
            verified += rep.verified
            discarded += rep.discarded
            dropped += rep.dropped

        per_node_max = np.zeros(n, dtype=object)
        for i, state in states.items():
            per_node_max[i] = state.c.max_entry()
        overall_max_msg = max(overall_max_msg, max_msg)
        rounds.append(RoundStats(
            r, sent, total_bytes, verified, discarded, dropped,
            sum(1 for s in states.values() if s.finalized), max_msg, per_node_max,
        ))
        if trajectory is not None:
            trajectory.append(_trajectory_row_matrix(states, n))
        if all(s.exited for s in states.values()):
            break

    signers = np.zeros(n, dtype=np.int64)
    final_max = 0
    for i, state in states.items():
        signers[i] = int(np.count_nonzero(state.c.entries))
        final_max = max(final_max, state.c.max_entry())
    return SimRun(
        config, topo, checkpoint, behaviors, rounds, finalized_round, msgs_sent,
        bytes_sent, signers, final_max, overall_max_msg, trajectory, "nodes", states,
    )


def _run_matrix(config, topo, checkpoint, offset, behaviors) -> SimRun:
    n, L = config.n, config.rounds
    sig_width = get_backend("oracle").params.sig_width
    honest = np.ones(n, dtype=bool)
    honest[list(behaviors)] = False
    fake = np.zeros(n, dtype=bool)
    fake[[i for i, k in behaviors.items() if k == "fake"]] = True
    fake_nodes = np.flatnonzero(fake)
    deg = topo.degrees()
    adj = topo.adjacency().tocoo()
    recv, send = adj.row, adj.col
    header = _header_bytes(n, sig_width)
    thr = config.threshold

    C = np.diag(honest.astype(np.int64))
    finalized = np.zeros(n, dtype=bool)
    exited = np.zeros(n, dtype=bool)
    finalized_round = np.full(n, -1, dtype=np.int64)
    msgs_sent = np.zeros(n, dtype=np.int64)
    bytes_sent = np.zeros(n, dtype=np.int64)
    trajectory = [C.copy()] if config.record_trajectory else None
    rounds = []
    overall_max_msg = 0

    for r in range(1, L + 1):
        masks = _cut_masks(config, offset + r)
        delivered = np.ones(len(recv), dtype=bool)
        for m in masks:
            delivered &= m[recv] == m[send]
        senders = honest & ~exited
        if config.break_on_finalize:
            receiving = honest & ~exited & ~finalized
            breaking = honest & ~exited & finalized
        else:
            receiving = senders
            breaking = np.zeros(n, dtype=bool)

        hs = np.flatnonzero(senders)
        size_h = header[hs] + encoded_length(C[hs]) if len(hs) else np.zeros(0, dtype=np.int64)
        # Forged vectors hold counts below 128: one byte per entry.
        size_f = header[fake_nodes] + n
        msgs_sent[hs] += deg[hs]
        bytes_sent[hs] += size_h * deg[hs]
        msgs_sent[fake_nodes] += deg[fake_nodes]
        bytes_sent[fake_nodes] += size_f * deg[fake_nodes]
        sent = int(deg[hs].sum() + deg[fake_nodes].sum())
        total_bytes = int((size_h * deg[hs]).sum() + (size_f * deg[fake_nodes]).sum())
        max_msg = int(size_h.max()) if len(hs) else 0

        talking = senders | fake
        valid = delivered & senders[send] & receiving[recv]
        discarded = int((delivered & fake[send] & receiving[recv]).sum())
        dropped = int((delivered & talking[send] & honest[recv] & ~receiving[recv]).sum())
        M = sp.csr_matrix(
            (np.ones(int(valid.sum()), dtype=np.int64), (recv[valid], send[valid])), shape=(n, n)
        )
        C = C + M @ C
        if C.size and int(C.max()) >= _INT64_LIMIT:
            raise OverflowError("signer counters left the int64 range; use the nodes engine")
        signers = np.count_nonzero(C, axis=1)
        newly = receiving & ~finalized & (signers >= thr)
        finalized |= newly
        finalized_round[newly] = r
        exited |= breaking

        overall_max_msg = max(overall_max_msg, max_msg)
        per_node_max = C.max(axis=1) if n else np.zeros(0, dtype=np.int64)
        rounds.append(RoundStats(
            r, sent, total_bytes, int(valid.sum()), discarded, dropped,
            int(finalized[honest].sum()), max_msg, per_node_max,
        ))
        if trajectory is not None:
            trajectory.append(C.copy())
        if exited[honest].all():
            break

    signers = np.count_nonzero(C, axis=1).astype(np.int64)
    final_max = int(C[honest].max()) if honest.any() else 0
    return SimRun(
        config, topo, checkpoint, behaviors, rounds, finalized_round, msgs_sent,
        bytes_sent, signers, final_max, overall_max_msg, trajectory, "matrix",
    )
