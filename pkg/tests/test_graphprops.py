import itertools

import networkx as nx
import pytest

from pfroots.graphprops import EXACT_LIMIT, SimpleGraph, order_width, treewidth


def complete(n):
    return SimpleGraph.from_edges(n, itertools.combinations(range(n), 2))


CASE5W_EDGES = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 4)]


@pytest.mark.parametrize(
    "graph, width",
    [
        (SimpleGraph.from_edges(3, [(0, 1), (1, 2)]), 1),
        (SimpleGraph.from_edges(5, CASE5W_EDGES), 2),
        (complete(4), 3),
        (complete(6), 5),
        (SimpleGraph.from_edges(7, [(i, (i + 1) % 7) for i in range(7)]), 2),
        (SimpleGraph.from_edges(1, []), 0),
        (SimpleGraph.from_edges(4, []), 0),
    ],
)
def test_known_widths(graph, width):
    res = treewidth(graph)
    assert res.exact
    assert res.width == width
    assert order_width(graph, res.order) == width


def test_grid_and_petersen():
    grid = nx.convert_node_labels_to_integers(nx.grid_2d_graph(4, 4))
    assert treewidth(SimpleGraph.from_edges(16, grid.edges())).width == 4
    pet = nx.petersen_graph()
    assert treewidth(SimpleGraph.from_edges(10, pet.edges())).width == 4


def test_matches_brute_force_over_orders():
    for seed in range(25):
        n = 3 + seed % 5
        g = nx.gnp_random_graph(n, 0.5, seed=seed)
        sg = SimpleGraph.from_edges(n, g.edges())
        bf = min(order_width(sg, p) for p in itertools.permutations(range(n)))
        width, order = treewidth(sg)
        assert width == bf
        assert order_width(sg, order) == width


def test_trees_have_width_one():
    for seed in range(10):
        t = nx.random_labeled_tree(12, seed=seed) if hasattr(nx, "random_labeled_tree") \
            else nx.random_tree(12, seed=seed)
        assert treewidth(SimpleGraph.from_edges(12, t.edges())).width == 1


def test_network_graph(case2w):
    assert treewidth(SimpleGraph.from_network(case2w)).width == 1


def test_large_graph_falls_back_to_min_fill():
    n = EXACT_LIMIT + 2
    g = SimpleGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    res = treewidth(g)
    assert not res.exact
    assert res.width == 1


def test_invalid_graphs():
    with pytest.raises(ValueError):
        SimpleGraph.from_edges(2, [(0, 0)])
    with pytest.raises(ValueError):
        SimpleGraph.from_edges(2, [(0, 2)])
    with pytest.raises(ValueError):
        order_width(complete(3), [0, 1])


def test_duplicate_edges_collapse():
    g = SimpleGraph.from_edges(3, [(0, 1), (1, 0), (1, 2)])
    assert g.edges == [(0, 1), (1, 2)]
