"""Property batteries run by ``aggsig suites`` and by the test suite."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import build_omega, lambda_max, oracle_check
from .crypto import get_backend
from .netsim import Partition, SimConfig, run_simulation
from .netsim.engine import make_keys
from .netsim.scenarios import leapfrog_scenario, random_safety_scenario, safety_harness
from .netsim.topology import NetworkTopology
from .vector import SignerVector


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  {self.detail}".rstrip()


# -- safety ----------------------------------------------------------------

def safety_hunt(seeds: int = 1000, start: int = 0):
    """Randomized equivocation runs; returns ``(violations, foreign, reports)``."""
    reports = [random_safety_scenario(s) for s in range(start, start + seeds)]
    violations = [r for r in reports if r.violation]
    foreign = sum(r.foreign_signers for r in reports)
    return violations, foreign, reports


def safety_suite(seeds: int = 1000) -> list[CheckResult]:
    violations, foreign, reports = safety_hunt(seeds)
    out = [
        CheckResult(
            f"equivocation hunt ({seeds} seeds)",
            not violations,
            f"violations={len(violations)} max_n={max(r.n for r in reports)}",
        ),
        CheckResult("no honest aggregate carries a foreign signer", foreign == 0, f"foreign={foreign}"),
    ]
    k3 = NetworkTopology.complete(3)
    loose = safety_harness(3, 2, 1, 1, 0, threshold_rule="loose", topology=k3)
    strict = safety_harness(3, 2, 1, 1, 0, threshold_rule="strict", topology=k3)
    out.append(CheckResult(
        "ceil(2n/3) threshold double-finalizes at n=3, f=1",
        loose.violation,
        f"A={loose.finalized_a} B={loose.finalized_b}",
    ))
    out.append(CheckResult(
        "floor(2n/3)+1 threshold holds at n=3, f=1",
        not strict.violation,
        f"A={strict.finalized_a} B={strict.finalized_b}",
    ))
    k9 = NetworkTopology.complete(9)
    thirds = safety_harness(9, 8, 3, 3, 0, topology=k9)
    out.append(CheckResult(
        "3/3/3 split finalizes neither hash",
        thirds.finalized_a == 0 and thirds.finalized_b == 0,
        f"A={thirds.finalized_a} B={thirds.finalized_b}",
    ))
    return out


# -- liveness --------------------------------------------------------------

def liveness_suite(seed: int = 0) -> list[CheckResult]:
    out = []
    for n, byz, behavior in [
        (200, 0.0, "silent"), (200, 0.1, "fake"), (200, 0.2, "mixed"),
        (200, 0.3, "silent"), (200, 0.3, "fake"), (60, 0.3, "inflate"),
    ]:
        run = run_simulation(SimConfig(n=n, degree=12, byz_fraction=byz, behavior=behavior, seed=seed))
        out.append(CheckResult(
            f"n={n} byz={byz:.0%} {behavior}",
            run.converged,
            f"round={run.convergence_round}",
        ))
    healed = run_simulation(SimConfig(
        n=200, degree=12, seed=seed, iterations=8,
        partitions=(Partition.halves(1, 2, 200),),
    ))
    out.append(CheckResult(
        "50/50 split in rounds 1-2, then healed",
        healed.converged,
        f"round={healed.convergence_round}",
    ))
    seq = leapfrog_scenario(seed)
    statuses = {cp: set() for cp in (100, 200)}
    for ledger in seq.ledgers.values():
        for h in statuses:
            statuses[h].add(ledger.status(h))
    out.append(CheckResult(
        "leapfrog: 2T finalized, T skipped, prefix closed",
        statuses[100] == {"skipped"} and statuses[200] == {"finalized"} and seq.prefix_closed,
        f"T={sorted(statuses[100])} 2T={sorted(statuses[200])}",
    ))
    return out


# -- oracle ----------------------------------------------------------------

def oracle_cases(count: int = 20, seed: int = 0):
    """``(n, degree, t, seed)`` tuples with ``n <= 32`` and ``t <= 5``."""
    rng = np.random.default_rng([seed, 0x0AC1])
    cases = []
    for k in range(count):
        n = int(rng.integers(3, 33))
        degree = int(rng.integers(2, min(8, n - 1) + 1)) if n > 3 else 2
        cases.append((n, degree, int(rng.integers(1, 6)), seed * 1000 + k))
    return cases


def oracle_run(n: int, degree: float, t: int, seed: int, engine: str = "auto"):
    config = SimConfig(
        n=n, degree=degree, iterations=t, seed=seed,
        break_on_finalize=False, record_trajectory=True, engine=engine,
    )
    return run_simulation(config)


def oracle_suite(count: int = 20, seed: int = 0) -> list[CheckResult]:
    out = []
    for n, degree, t, s in oracle_cases(count, seed):
        run = oracle_run(n, degree, t, s)
        omega = build_omega(run.topology)
        exact = oracle_check(run.trajectory, omega)
        lam = lambda_max(omega)
        bounded = run.max_entry <= lam ** t * (1 + 1e-9)
        out.append(CheckResult(
            f"n={n} deg={degree} t={t}",
            exact and bounded,
            f"max={run.max_entry} lambda^t={lam ** t:.1f}",
        ))
    return out


# -- crypto ----------------------------------------------------------------

def bilinearity_samples(count: int, seed: int = 0) -> int:
    """Number of ``e(g^a, h^b) == e(g, h)^(ab)`` checks that fail."""
    be = get_backend("pairing")
    rng = random.Random(f"aggsig-bilinear:{seed}")
    base = be.pairing(be.g1, be.params.g)
    bad = 0
    for _ in range(count):
        a, b = rng.randrange(1, be.p), rng.randrange(1, be.p)
        lhs = be.pairing(be.sig_pow(be.g1, a), be.key_pow(be.params.g, b))
        if be.gt_bytes(lhs) != be.gt_bytes(be.gt_pow(base, a * b % be.p)):
            bad += 1
    return bad


def tamper(sigma, c: SignerVector, rng: random.Random, backend):
    """Change exactly one element: one counter, or the aggregate itself."""
    if rng.random() < 0.5:
        entries = c.tolist()
        u = rng.randrange(c.n)
        entries[u] = (entries[u] + rng.randrange(1, c.p)) % c.p
        return sigma, SignerVector(entries, c.p), f"c[{u}]"
    return backend.sig_mul(sigma, backend.random_element(rng)), c, "sigma"


def real_backend_run(n: int = 32, degree: float = 6, seed: int = 0):
    return run_simulation(SimConfig(n=n, degree=degree, seed=seed, backend="pairing"))


def crypto_suite(n: int = 32, seed: int = 0, tamperings: int = 100, samples: int = 20) -> list[CheckResult]:
    be = get_backend("pairing")
    out = []
    bad = bilinearity_samples(samples, seed)
    out.append(CheckResult(f"bilinearity ({samples} samples)", bad == 0, f"failures={bad}"))

    run = real_backend_run(n, seed=seed)
    pks = [kp.pk for kp in make_keys(n, seed, be)]
    table = be.precompute_pairings(pks, run.checkpoint)
    finals = list(run.states.values())
    table_ok = all(be.verify_aggregate(s.sigma, s.c, table) for s in finals)
    inline_ok = all(be.verify_inline(s.sigma, s.c, pks, run.checkpoint) for s in finals)
    out.append(CheckResult(
        f"real run n={n}: converged, every honest aggregate verifies",
        run.converged and table_ok and inline_ok,
        f"round={run.convergence_round}",
    ))

    rng = random.Random(f"aggsig-tamper:{seed}")
    accepted = 0
    for _ in range(tamperings):
        state = finals[rng.randrange(len(finals))]
        sigma, c, _ = tamper(state.sigma, state.c, rng, be)
        accepted += be.verify_aggregate(sigma, c, table)
    out.append(CheckResult(f"{tamperings} single-element tamperings rejected", accepted == 0, f"accepted={accepted}"))
    return out


SUITES: dict[str, Callable[..., list[CheckResult]]] = {
    "safety": safety_suite,
    "liveness": liveness_suite,
    "oracle": oracle_suite,
    "crypto": crypto_suite,
}
