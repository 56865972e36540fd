import pytest

from algos.graph import edge_count, reachable, shortest_path_length, topological_order

GRAPH = {"a": ["b", "c"], "b": ["d"], "c": ["d", "e"], "d": ["f"], "e": ["f"], "f": []}


def test_shortest_path_length():
    assert shortest_path_length(GRAPH, "a", "a") == 0
    assert shortest_path_length(GRAPH, "a", "b") == 1
    assert shortest_path_length(GRAPH, "a", "f") == 3
    assert shortest_path_length(GRAPH, "f", "a") is None
    assert shortest_path_length({"x": ["y"], "y": ["x"]}, "x", "z") is None


def test_topological_order():
    order = topological_order(GRAPH)
    assert order == ["a", "b", "c", "d", "e", "f"]
    assert topological_order({}) == []
    with pytest.raises(ValueError):
        topological_order({"a": ["b"], "b": ["a"]})


def test_reachable():
    assert reachable(GRAPH, "c") == {"c", "d", "e", "f"}
    assert reachable(GRAPH, "f") == {"f"}
    assert reachable({"x": ["x"]}, "x") == {"x"}


def test_edge_count():
    assert edge_count(GRAPH) == 7
    assert edge_count({}) == 0
