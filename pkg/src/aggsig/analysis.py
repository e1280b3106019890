"""Counter growth model for the gossip loop without the finalize break.

With the break removed, column ``k`` of every guardian's signer vector
evolves as ``x_t = Omega @ x_{t-1}``.  ``Omega`` is the adjacency matrix
with ones added on the diagonal.  This module computes those columns
exactly, compares them with a simulation trace, and bounds their growth
by the top eigenvalue of ``Omega``.
"""

from __future__ import annotations

import numpy as np

from .netsim.topology import NetworkTopology


class ConvergenceError(ArithmeticError):
    pass


def build_omega(topology: NetworkTopology) -> np.ndarray:
    """Dense 0/1 connectivity matrix with a unit diagonal."""
    omega = np.eye(topology.n, dtype=np.int64)
    for i, nbrs in enumerate(topology.neighbors):
        omega[i, list(nbrs)] = 1
    return omega


def _rows(omega: np.ndarray) -> list[list[int]]:
    return [np.flatnonzero(row).tolist() for row in np.asarray(omega)]


def propagate_counts(omega: np.ndarray, k: int, t: int) -> list[int]:
    """``Omega**t @ e_k`` in exact integer arithmetic.

    Applied as ``t`` sparse matrix-vector products; ``Omega**t`` itself is
    never formed.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    rows = _rows(omega)
    x = [0] * len(rows)
    x[k] = 1
    for _ in range(t):
        x = [sum(x[j] for j in row) for row in rows]
    return x


def count_history(omega: np.ndarray, k: int, t_max: int) -> list[list[int]]:
    """``[Omega**t @ e_k for t in 0..t_max]``."""
    rows = _rows(omega)
    x = [0] * len(rows)
    x[k] = 1
    out = [x]
    for _ in range(t_max):
        x = [sum(x[j] for j in row) for row in rows]
        out.append(x)
    return out


def oracle_check(trajectory, omega: np.ndarray) -> bool:
    """True iff node ``i`` holds ``(Omega**t @ e_k)[i]`` in entry ``k`` at every round.

    ``trajectory[t]`` is the ``n x n`` matrix whose row ``i`` is guardian
    ``i``'s signer vector after round ``t`` (``t = 0`` is initialization).
    It must come from an all-honest, unpartitioned run with the break
    disabled.
    """
    n = len(omega)
    t_max = len(trajectory) - 1
    for k in range(n):
        for t, x in enumerate(count_history(omega, k, t_max)):
            column = [int(v) for v in np.asarray(trajectory[t])[:, k].tolist()]
            if column != x:
                return False
    return True


def lambda_max(omega: np.ndarray, tol: float = 1e-9, max_steps: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric nonnegative matrix by power iteration."""
    a = np.asarray(omega, dtype=float)
    if a.shape[0] == 0:
        return 0.0
    x = np.ones(a.shape[0]) / np.sqrt(a.shape[0])
    lam = float(x @ a @ x)
    for _ in range(max_steps):
        y = a @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
        new = float(x @ a @ x)
        # Rayleigh quotients converge quadratically; stop well inside tol.
        if abs(new - lam) <= 1e-3 * tol * max(abs(new), 1.0):
            return new
        lam = new
    raise ConvergenceError(f"power iteration did not converge in {max_steps} steps")


def spectral_bound(omega: np.ndarray, t: int) -> tuple[float, float]:
    """``(lambda_max, lambda_max ** t)``: growth scale of counter entries."""
    lam = lambda_max(omega)
    return lam, lam ** t
