import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aggsig.netsim import ConfigError, NetworkTopology, generate_topology


def test_cap_forces_complete_graph():
    topo = generate_topology(4, 3, seed=0)
    assert topo.edges() == NetworkTopology.complete(4).edges()


def test_two_nodes_single_edge():
    assert generate_topology(2, 1, seed=5).edges() == [(0, 1)]


def test_thousand_nodes_degree_twenty():
    topo = generate_topology(1000, 20, seed=7)
    assert topo.is_connected()
    assert 17 <= topo.mean_degree() <= 23
    assert topo.degrees().max() <= 40


def test_deterministic_per_seed():
    a = generate_topology(300, 8, seed=2)
    assert a == generate_topology(300, 8, seed=2)
    assert a != generate_topology(300, 8, seed=3)


@pytest.mark.parametrize("n, degree", [(2, 5), (1, 1), (10, 0.5), (10, 10)])
def test_infeasible_parameters(n, degree):
    with pytest.raises(ConfigError):
        generate_topology(n, degree, seed=0)


def test_from_edges_validates():
    with pytest.raises(ValueError):
        NetworkTopology.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        NetworkTopology.from_edges(3, [(0, 3)])
    t = NetworkTopology.from_edges(3, [(0, 1), (1, 0), (1, 2)])
    assert t.edges() == [(0, 1), (1, 2)]


def test_edge_list_export():
    text = NetworkTopology.from_edges(3, [(0, 1), (1, 2)]).to_edge_list()
    assert text.splitlines() == ["# n=3 edges=2", "0 1", "1 2"]


@settings(max_examples=60)
@given(st.integers(3, 120), st.floats(1.0, 12.0), st.integers(0, 10**6))
def test_generated_graphs_are_simple_connected_and_capped(n, degree, seed):
    if degree >= n:
        return
    topo = generate_topology(n, degree, seed)
    adj = topo.adjacency().toarray()
    assert (adj == adj.T).all() and not adj.diagonal().any()
    assert topo.is_connected()
    target = min(round(n * degree / 2), n * (n - 1) // 2)
    assert len(topo.edges()) >= min(target, n - 1)
    # Sparse targets may need one repair edge past the cap.
    assert topo.degrees().max() <= int(2 * degree) + 1


def test_mean_degree_hits_target_on_large_graphs():
    for seed in range(3):
        assert generate_topology(2000, 20, seed).mean_degree() == pytest.approx(20, abs=0.01)
