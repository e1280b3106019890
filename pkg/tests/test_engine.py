import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aggsig.netsim import (
    ConfigError,
    NetworkTopology,
    Partition,
    SimConfig,
    assign_byzantine,
    default_iterations,
    fake_vector,
    generate_topology,
    run_simulation,
)


def test_default_iterations():
    assert default_iterations(1000, 20) == 6
    assert default_iterations(3000, 20) == 7
    assert default_iterations(10, 3) == 6  # ceil(4.19) + 1
    assert default_iterations(4, 3) == 5


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=0, degree=1),
        dict(n=10, degree=3, byz_fraction=0.4),
        dict(n=10, degree=3, behavior="loud"),
        dict(n=10, degree=3, backend="rsa"),
        dict(n=10, degree=3, engine="gpu"),
        dict(n=10, degree=3, threshold_rule="half"),
        dict(n=10, degree=3, iterations=-1),
        dict(n=2, degree=5),
        dict(n=10, degree=3, seed=-1),
    ],
)
def test_bad_configs(kwargs):
    with pytest.raises(ConfigError):
        SimConfig(**kwargs)


def test_byzantine_assignment():
    cfg = SimConfig(n=100, degree=6, byz_fraction=0.3, behavior="mixed", seed=4)
    byz = assign_byzantine(cfg)
    assert len(byz) == 30
    assert sorted(set(byz.values())) == ["fake", "silent"]
    assert list(byz.values()).count("fake") == 15
    assert byz == assign_byzantine(cfg)


def test_fake_vector_shape():
    v = fake_vector(3, node=7, rnd=2, n=50)
    assert v.shape == (50,) and v.min() >= 0 and v.max() <= 3 and v[7] >= 1
    assert (v == fake_vector(3, 7, 2, 50)).all()


def test_k4_one_round():
    run = run_simulation(SimConfig(n=4, degree=3))
    assert run.convergence_round == 1
    assert run.max_entry == 1
    assert run.msgs_sent.tolist() == [6, 6, 6, 6]


def test_single_guardian():
    run = run_simulation(SimConfig(n=1, degree=0))
    assert run.convergence_round == 1


def test_matrix_engine_needs_oracle():
    with pytest.raises(ValueError):
        run_simulation(SimConfig(n=8, degree=3, backend="pairing", engine="matrix"))
    with pytest.raises(ValueError):
        run_simulation(SimConfig(n=9, degree=3, byz_fraction=0.2, behavior="inflate", engine="matrix"))


def test_deterministic():
    cfg = SimConfig(n=300, degree=10, byz_fraction=0.2, behavior="mixed", seed=8)
    assert run_simulation(cfg).fingerprint() == run_simulation(cfg).fingerprint()
    other = SimConfig(n=300, degree=10, byz_fraction=0.2, behavior="mixed", seed=9)
    assert run_simulation(cfg).fingerprint() != run_simulation(other).fingerprint()


configs = st.builds(
    dict,
    n=st.integers(4, 40),
    degree=st.integers(2, 6),
    byz_fraction=st.sampled_from([0.0, 0.1, 0.2, 0.3]),
    behavior=st.sampled_from(["silent", "fake", "mixed"]),
    seed=st.integers(0, 10**6),
    break_on_finalize=st.booleans(),
    iterations=st.one_of(st.none(), st.integers(1, 8)),
    split=st.one_of(st.none(), st.tuples(st.integers(1, 3), st.integers(0, 3), st.floats(0.1, 0.9))),
)


@settings(max_examples=60)
@given(configs)
def test_engines_agree(kw):
    split = kw.pop("split")
    if kw["degree"] >= kw["n"]:
        kw["degree"] = kw["n"] - 1
    if split:
        start, length, frac = split
        kw["partitions"] = (Partition.halves(start, start + length, kw["n"], frac),)
    a = run_simulation(SimConfig(engine="nodes", record_trajectory=True, **kw))
    b = run_simulation(SimConfig(engine="matrix", record_trajectory=True, **kw))
    assert a.fingerprint() == b.fingerprint()
    assert len(a.trajectory) == len(b.trajectory)
    for x, y in zip(a.trajectory, b.trajectory):
        assert np.array_equal(np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64))


def test_thirty_percent_silent_still_finalizes():
    for seed in range(10):
        run = run_simulation(SimConfig(n=1000, degree=20, byz_fraction=0.3, behavior="silent", seed=seed))
        assert run.converged and run.convergence_round <= run.config.rounds


@pytest.mark.parametrize("byz", [0.1, 0.2, 0.3])
def test_fake_and_silent_within_two_rounds(byz):
    for seed in range(5):
        rounds = [
            run_simulation(SimConfig(n=600, degree=12, byz_fraction=byz, behavior=b, seed=seed)).convergence_round
            for b in ("fake", "silent")
        ]
        assert None not in rounds and abs(rounds[0] - rounds[1]) <= 2


def test_message_count_bounded_by_rounds_and_degree():
    for seed in range(4):
        run = run_simulation(SimConfig(n=500, degree=10, byz_fraction=0.2, behavior="fake", seed=seed))
        deg = run.topology.degrees()
        honest = run.honest
        assert (run.msgs_sent[honest] <= (run.convergence_round + 1) * deg[honest]).all()


def test_fake_messages_are_discarded_not_verified():
    run = run_simulation(SimConfig(n=200, degree=8, byz_fraction=0.3, behavior="fake", seed=1))
    assert sum(r.discarded for r in run.rounds) > 0
    honest = run.honest
    assert (run.signers[honest] >= run.config.threshold).all()


def test_permanent_partition_blocks_finalization():
    run = run_simulation(SimConfig(n=100, degree=8, iterations=6, partitions=(Partition.halves(1, 6, 100),)))
    assert not run.converged
    assert (run.signers[run.honest] <= 50).all()


def test_partition_then_heal_finalizes():
    run = run_simulation(SimConfig(n=200, degree=10, iterations=8, partitions=(Partition.halves(1, 2, 200),)))
    assert run.converged and run.convergence_round > 2


def test_inflation_attack_only_inflates():
    cfg = SimConfig(n=60, degree=6, byz_fraction=0.2, behavior="inflate", seed=2)
    run = run_simulation(cfg)
    plain = run_simulation(SimConfig(n=60, degree=6, byz_fraction=0.2, behavior="silent", seed=2))
    assert run.engine == "nodes"
    assert run.converged
    assert run.max_entry >= cfg.inflation_factor
    assert run.max_entry > plain.max_entry
    assert run.max_message_bytes > plain.max_message_bytes


def test_supplied_topology_is_used():
    topo = NetworkTopology.complete(6)
    run = run_simulation(SimConfig(n=6, degree=3), topology=topo)
    assert run.topology is topo and run.convergence_round == 1
    with pytest.raises(ValueError):
        run_simulation(SimConfig(n=7, degree=3), topology=topo)


def test_round_stats_add_up():
    run = run_simulation(SimConfig(n=300, degree=10, byz_fraction=0.2, behavior="fake", seed=3))
    assert sum(r.messages_sent for r in run.rounds) == run.msgs_sent.sum()
    assert sum(r.bytes_sent for r in run.rounds) == run.bytes_sent.sum()
    assert run.rounds[-1].finalized_honest == run.honest.sum()
    assert max(r.max_message_bytes for r in run.rounds) == run.max_message_bytes


def test_pairing_and_oracle_backends_agree():
    topo = generate_topology(12, 4, seed=1)
    for byz, behavior in [(0.0, "silent"), (0.25, "fake")]:
        kw = dict(n=12, degree=4, byz_fraction=byz, behavior=behavior, seed=1, record_trajectory=True, engine="nodes")
        real = run_simulation(SimConfig(backend="pairing", **kw), topology=topo)
        acct = run_simulation(SimConfig(backend="oracle", **kw), topology=topo)
        assert real.convergence_round == acct.convergence_round
        assert [t.tolist() for t in real.trajectory] == [t.tolist() for t in acct.trajectory]
