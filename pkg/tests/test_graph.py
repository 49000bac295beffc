import json

import numpy as np
import pytest

from causalstream.graph import CausalGraph, build_dag, topological_order


def _hand_graph():
    return CausalGraph(
        n_nodes=5,
        parents={0: (), 1: (), 2: (0, 1), 3: (2,), 4: (2, 3)},
        target=4,
    )


def test_basic_properties():
    g = _hand_graph()
    assert g.roots == (0, 1)
    assert g.feature_nodes == (0, 1, 2, 3)
    assert g.is_root(0) and not g.is_root(2)
    assert g.children(2) == (3, 4)
    assert set(g.ancestors(4)) == {0, 1, 2, 3}
    assert (2, 3) in g.edges and (3, 4) in g.edges


def test_topological_order_ascending_tiebreak():
    # 0 and 2 are both ready at the start; the smaller id goes first
    order = topological_order({0: (), 1: (2,), 2: (), 3: (0, 2)})
    assert order == (0, 2, 1, 3)
    assert topological_order(_hand_graph()) == (0, 1, 2, 3, 4)


def test_cycle_raises():
    with pytest.raises(ValueError):
        topological_order({0: (), 1: (2,), 2: (1,)})


def test_validation_errors():
    with pytest.raises(ValueError):
        CausalGraph(n_nodes=2, parents={0: (), 1: (0,)}, target=1)
    with pytest.raises(ValueError):  # target must not be a root
        CausalGraph(n_nodes=3, parents={0: (), 1: (), 2: (0,)}, target=1)
    with pytest.raises(ValueError):  # self-parent
        CausalGraph(n_nodes=3, parents={0: (), 1: (1,), 2: (0, 1)}, target=2)
    with pytest.raises(ValueError):  # parent ids must cover 0..n-1 exactly
        CausalGraph(n_nodes=3, parents={0: (), 2: (0,)}, target=2)


def test_serialization_round_trip():
    g = _hand_graph()
    assert CausalGraph.from_dict(g.to_dict()) == g
    # canonical JSON of the dict is stable
    assert json.dumps(g.to_dict(), sort_keys=True) == json.dumps(
        CausalGraph.from_dict(g.to_dict()).to_dict(), sort_keys=True
    )


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("d,n_roots,max_parents", [(5, 2, 3), (10, 4, 5), (3, 1, 2)])
def test_build_dag_validity(seed, d, n_roots, max_parents):
    """Every draw satisfies acyclicity, root count, parent bounds, one target."""
    rng = np.random.default_rng(seed)
    g = build_dag(d, n_roots, 1, max_parents, rng)
    assert g.n_nodes == d + 1
    assert len(g.roots) == n_roots
    assert not g.is_root(g.target)
    order = topological_order(g)  # raises on a cycle
    assert sorted(order) == list(range(d + 1))
    pos = {n: i for i, n in enumerate(order)}
    for node in range(d + 1):
        ps = g.parents[node]
        if g.is_root(node):
            assert ps == ()
            continue
        assert 1 <= len(ps) <= max_parents
        assert all(pos[p] < pos[node] for p in ps)


def test_same_seed_byte_identical():
    a = build_dag(8, 3, 1, 3, np.random.default_rng(42))
    b = build_dag(8, 3, 1, 3, np.random.default_rng(42))
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(
        b.to_dict(), sort_keys=True
    )
