"""Random guardian graphs grown by sequential joins."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components


class ConfigError(ValueError):
    """Simulation parameters that cannot be satisfied."""


@dataclass(frozen=True)
class NetworkTopology:
    """Undirected simple graph; ``neighbors[i]`` is sorted, no self loops."""

    n: int
    neighbors: tuple

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "NetworkTopology":
        adj = [set() for _ in range(n)]
        for a, b in edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside 0..{n - 1}")
            if a == b:
                raise ValueError("self loops are not stored")
            adj[a].add(b)
            adj[b].add(a)
        return cls(n, tuple(tuple(sorted(s)) for s in adj))

    @classmethod
    def complete(cls, n: int) -> "NetworkTopology":
        return cls.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nb in enumerate(self.neighbors) for j in nb if i < j]

    def degrees(self) -> np.ndarray:
        return np.array([len(nb) for nb in self.neighbors], dtype=np.int64)

    def mean_degree(self) -> float:
        return float(self.degrees().mean()) if self.n else 0.0

    def adjacency(self) -> sp.csr_matrix:
        src = np.repeat(np.arange(self.n), self.degrees())
        dst = np.fromiter((j for nb in self.neighbors for j in nb), dtype=np.int64, count=len(src))
        data = np.ones(len(src), dtype=np.int64)
        return sp.csr_matrix((data, (src, dst)), shape=(self.n, self.n))

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        count, _ = connected_components(self.adjacency(), directed=False)
        return count == 1

    def to_edge_list(self) -> str:
        lines = [f"# n={self.n} edges={len(self.edges())}"]
        lines += [f"{a} {b}" for a, b in self.edges()]
        return "\n".join(lines) + "\n"


def _pick(rng, pool_size: int, want: int, ok) -> list[int]:
    """Up to ``want`` distinct indices in ``[0, pool_size)`` accepted by ``ok``."""
    chosen: list[int] = []
    taken = set()
    tries = 0
    while len(chosen) < want and tries < 8 * want + 16:
        v = int(rng.integers(pool_size))
        tries += 1
        if v not in taken and ok(v):
            taken.add(v)
            chosen.append(v)
    if len(chosen) < want:
        rest = [v for v in rng.permutation(pool_size).tolist() if v not in taken and ok(v)]
        chosen += rest[: want - len(chosen)]
    return chosen


def _grow(n: int, avg_degree: float, rng) -> NetworkTopology:
    cap = max(1, int(math.floor(2 * avg_degree)))
    adj = [set() for _ in range(n)]
    edges = 0
    half = avg_degree / 2
    base = int(math.floor(half))

    # Join phase: each node in turn opens about avg_degree/2 outbound links
    # to peers drawn from the whole candidate list, skipping full peers.
    for k in range(n):
        want = base + (1 if rng.random() < half - base else 0)
        want = min(max(1, want), cap - len(adj[k]))
        if want <= 0:
            continue
        picks = _pick(rng, n, want, lambda v: v != k and v not in adj[k] and len(adj[v]) < cap)
        for v in picks:
            adj[k].add(v)
            adj[v].add(k)
            edges += 1

    # Top-up phase: nodes short of the target degree keep asking for
    # peers until the edge budget is spent.
    target = min(int(round(n * avg_degree / 2)), n * (n - 1) // 2)
    while edges < target:
        pool = [v for v in range(n) if len(adj[v]) < avg_degree]
        pool = pool or [v for v in range(n) if len(adj[v]) < cap]
        progressed = False
        for u in rng.permutation(pool).tolist():
            if edges >= target:
                break
            if len(adj[u]) >= cap:
                continue
            peer = _pick(rng, n, 1, lambda v: v != u and v not in adj[u] and len(adj[v]) < cap)
            if peer:
                adj[u].add(peer[0])
                adj[peer[0]].add(u)
                edges += 1
                progressed = True
        if not progressed:
            break
    return NetworkTopology(n, tuple(tuple(sorted(s)) for s in adj))


def _repair(topo: NetworkTopology, rng) -> NetworkTopology:
    """Chain the components together through their lowest-degree nodes."""
    count, labels = connected_components(topo.adjacency(), directed=False)
    adj = [set(nb) for nb in topo.neighbors]
    order = rng.permutation(count).tolist()

    def endpoint(comp):
        members = np.flatnonzero(labels == comp).tolist()
        low = min(len(adj[v]) for v in members)
        return int(rng.choice([v for v in members if len(adj[v]) == low]))

    for a_comp, b_comp in zip(order, order[1:]):
        a, b = endpoint(a_comp), endpoint(b_comp)
        adj[a].add(b)
        adj[b].add(a)
    return NetworkTopology(topo.n, tuple(tuple(sorted(s)) for s in adj))


def generate_topology(n: int, avg_degree: float, seed: int, max_attempts: int = 10) -> NetworkTopology:
    """Connected random graph with mean degree close to ``avg_degree``.

    Nodes join in index order.  Each opens about ``avg_degree / 2`` links to
    random peers from the full candidate list that are below the degree cap
    (twice the target).  A top-up pass then adds edges until the
    mean degree hits the target.  Disconnected draws are regenerated from a
    derived seed; if every attempt is disconnected (very sparse targets)
    the last draw's components are chained with one extra edge each.
    """
    if n < 2:
        raise ConfigError("need at least two guardians")
    if not 1 <= avg_degree < n:
        raise ConfigError(f"average degree {avg_degree} infeasible for n={n}")
    for attempt in range(max_attempts):
        rng = np.random.default_rng([int(seed), 0x70B0, attempt])
        topo = _grow(n, avg_degree, rng)
        if topo.is_connected():
            return topo
    return _repair(topo, rng)
