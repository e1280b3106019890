import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aggsig.analysis import (
    ConvergenceError,
    build_omega,
    count_history,
    lambda_max,
    oracle_check,
    propagate_counts,
    spectral_bound,
)
from aggsig.netsim import NetworkTopology
from aggsig.suites import oracle_cases, oracle_run

K4 = NetworkTopology.complete(4)
P3 = NetworkTopology.from_edges(3, [(0, 1), (1, 2)])


def test_omega_examples():
    assert (build_omega(K4) == np.ones((4, 4))).all()
    assert build_omega(P3).tolist() == [[1, 1, 0], [1, 1, 1], [0, 1, 1]]
    assert (build_omega(NetworkTopology.from_edges(2, [])) == np.eye(2)).all()


def test_propagate_examples():
    omega = build_omega(K4)
    assert propagate_counts(omega, 2, 0) == [0, 0, 1, 0]
    assert propagate_counts(omega, 0, 1) == [1, 1, 1, 1]
    assert propagate_counts(omega, 0, 2) == [4, 4, 4, 4]


def test_propagate_matches_matrix_power():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(2, 20))
        a = np.triu(rng.random((n, n)) < 0.3, 1)
        topo = NetworkTopology.from_edges(n, zip(*np.nonzero(a)))
        omega = build_omega(topo)
        t = int(rng.integers(0, 7))
        k = int(rng.integers(0, n))
        assert propagate_counts(omega, k, t) == np.linalg.matrix_power(omega, t)[:, k].tolist()


def test_propagate_is_exact_beyond_int64():
    omega = build_omega(NetworkTopology.complete(16))
    assert propagate_counts(omega, 0, 20) == [16**19] * 16


@settings(max_examples=30)
@given(st.integers(2, 12), st.integers(0, 4), st.integers(0, 4), st.integers(0, 10**6))
def test_exponents_add_and_counts_are_reciprocal(n, t1, t2, seed):
    rng = np.random.default_rng(seed)
    a = np.triu(rng.random((n, n)) < 0.4, 1)
    omega = build_omega(NetworkTopology.from_edges(n, zip(*np.nonzero(a))))
    rows = [propagate_counts(omega, k, t1 + t2) for k in range(n)]
    for k in range(n):
        step = propagate_counts(omega, k, t1)
        for _ in range(t2):
            step = [int(v) for v in omega @ np.array(step, dtype=object)]
        assert step == rows[k]
    for i in range(n):
        for k in range(n):
            assert rows[k][i] == rows[i][k]


def test_history_starts_at_unit_vector():
    hist = count_history(build_omega(P3), 0, 3)
    assert hist[0] == [1, 0, 0]
    assert hist[1] == [1, 1, 0]
    assert hist[3] == propagate_counts(build_omega(P3), 0, 3)


def test_lambda_examples():
    assert lambda_max(build_omega(K4)) == pytest.approx(4, rel=1e-12)
    assert lambda_max(np.eye(5)) == pytest.approx(1, rel=1e-12)
    assert lambda_max(build_omega(P3)) == pytest.approx(1 + math.sqrt(2), rel=1e-9)
    lam, growth = spectral_bound(np.eye(3, dtype=np.int64), 10)
    assert growth == pytest.approx(1)


def test_lambda_matches_dense_eigensolver():
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(5, 60))
        a = np.triu(rng.random((n, n)) < 0.2, 1)
        omega = build_omega(NetworkTopology.from_edges(n, zip(*np.nonzero(a))))
        assert lambda_max(omega) == pytest.approx(np.linalg.eigvalsh(omega).max(), rel=1e-9)


def test_lambda_non_convergence_raises():
    omega = build_omega(NetworkTopology.from_edges(50, [(i, i + 1) for i in range(49)]))
    with pytest.raises(ConvergenceError):
        lambda_max(omega, max_steps=3)


def test_oracle_check_k4():
    run = oracle_run(4, 3, 2, seed=0)
    assert run.trajectory[2].tolist() == [[4] * 4] * 4
    assert oracle_check(run.trajectory, build_omega(run.topology))
    assert oracle_check(run.trajectory[:1], build_omega(run.topology))


def test_oracle_check_detects_a_perturbation():
    run = oracle_run(12, 3, 3, seed=2)
    omega = build_omega(run.topology)
    bad = [t.copy() for t in run.trajectory]
    bad[2][5, 7] += 1
    assert oracle_check(run.trajectory, omega)
    assert not oracle_check(bad, omega)


@pytest.mark.parametrize("case", oracle_cases(20, seed=3), ids=lambda c: f"n{c[0]}-d{c[1]}-t{c[2]}")
@pytest.mark.parametrize("engine", ["nodes", "matrix"])
def test_simulation_equals_matrix_powers(case, engine):
    n, degree, t, seed = case
    run = oracle_run(n, degree, t, seed, engine=engine)
    omega = build_omega(run.topology)
    assert len(run.trajectory) == t + 1
    assert oracle_check(run.trajectory, omega)
    lam = lambda_max(omega)
    assert run.max_entry <= lam**t * (1 + 1e-9)
