import networkx as nx
import numpy as np
import pytest

from core import families
from core.errors import DisconnectedGraphError
from core.graph import (
    bandwidth,
    bridges,
    components,
    is_connected,
    laplacian_matrix,
    permute_graph,
    reorder_for_bandwidth,
    require_connected,
)
from db.models import NodePermutation, WeightedGraph


def test_laplacian_ignores_loops():
    g = WeightedGraph.from_edges(2, [(0, 1, 2.0)], loops={0: 5.0})
    L = laplacian_matrix(g).toarray()
    assert np.array_equal(L, [[2.0, -2.0], [-2.0, 2.0]])
    assert list(g.degrees) == [7.0, 2.0]


def test_disconnected_graph_names_component():
    g = WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert not is_connected(g)
    assert components(g) == [[0, 1], [2, 3]]
    with pytest.raises(DisconnectedGraphError) as excinfo:
        require_connected(g)
    assert excinfo.value.component == (3, 4)


def test_single_node_is_connected():
    assert is_connected(WeightedGraph(n=1))


def test_bridges(p3, c10):
    assert bridges(p3) == {(0, 1), (1, 2)}
    assert bridges(c10) == frozenset()
    # square 0-1-2-3 with a pendant node 4 on node 0
    g = WeightedGraph.from_edges(5, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1), (0, 4, 1)])
    assert bridges(g) == {(0, 4)}


def test_reorder_keeps_an_ordered_path():
    g = families.path(20)
    relabeled, perm, b = reorder_for_bandwidth(g)
    assert perm.is_identity
    assert relabeled is g
    assert b == 2


def test_reorder_recovers_bandwidth_of_shuffled_path():
    g = families.path(30)
    rng = np.random.default_rng(3)
    shuffled = permute_graph(g, NodePermutation.from_forward(rng.permutation(30)))
    assert bandwidth(shuffled) > 2
    relabeled, perm, b = reorder_for_bandwidth(shuffled)
    assert b == 2
    assert relabeled.m == 29
    # labels follow their nodes
    assert sorted(relabeled.labels) == list(range(1, 31))


def test_star_bandwidth_bounded_by_n(star10):
    _, _, b = reorder_for_bandwidth(star10)
    assert 2 <= b <= 10


def test_permute_graph_moves_weights_and_loops():
    g = WeightedGraph.from_edges(3, [(0, 1, 2.0), (1, 2, 3.0)], loops={0: 0.5})
    perm = NodePermutation.from_forward([2, 1, 0])
    h = permute_graph(g, perm)
    assert h.weight(1, 2) == 2.0
    assert h.weight(0, 1) == 3.0
    assert dict(h.loops) == {2: 0.5}
    assert h.labels == (3, 2, 1)


def _bridges_by_removal(g):
    found = set()
    for p, q, _ in g.edge_list:
        rest = WeightedGraph(n=g.n, weights={k: w for k, w in g.weights.items() if k != (p, q)})
        if not is_connected(rest):
            found.add((p, q))
    return found


def test_bridges_match_edge_removal_on_all_small_graphs():
    checked = 0
    for G in nx.graph_atlas_g():
        if G.number_of_nodes() < 2 or not nx.is_connected(G):
            continue
        g = families.from_networkx(G)
        assert bridges(g) == _bridges_by_removal(g)
        checked += 1
    # connected graphs on 2..7 nodes
    assert checked == 995


@pytest.mark.parametrize("seed", range(5))
def test_reorder_keeps_degrees_and_total_weight(seed):
    g = families.random_connected(40, seed=seed)
    rng = np.random.default_rng(seed)
    shuffled = permute_graph(g, NodePermutation.from_forward(rng.permutation(40)))
    for source in (g, shuffled):
        h, perm, _ = reorder_for_bandwidth(source)
        assert sorted(h.degrees) == sorted(source.degrees)
        assert np.array_equal(h.degrees, source.degrees[perm.forward])
        assert h.total_weight == source.total_weight
