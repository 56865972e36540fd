import pytest

from algos.search import binary_search, closest_value, find_first_in_sorted, linear_search


def test_binary_search_hits():
    items = [1, 3, 5, 7, 9, 11]
    for index, value in enumerate(items):
        assert binary_search(items, value) == index


def test_binary_search_misses():
    assert binary_search([1, 3, 5], 4) == -1
    assert binary_search([1, 3, 5], 0) == -1
    assert binary_search([1, 3, 5], 6) == -1
    assert binary_search([], 1) == -1


def test_find_first_with_duplicates():
    assert find_first_in_sorted([1, 2, 2, 2, 3], 2) == 1
    assert find_first_in_sorted([2, 2, 2], 2) == 0
    assert find_first_in_sorted([1, 2, 3, 4, 5], 5) == 4


def test_find_first_missing():
    assert find_first_in_sorted([1, 2, 4], 3) == -1
    assert find_first_in_sorted([], 3) == -1
    assert find_first_in_sorted([1, 2, 4], 9) == -1


def test_linear_search():
    assert linear_search([5, 8, 12, 7], lambda x: x > 10) == 2
    assert linear_search([5, 8], lambda x: x > 10) is None
    assert linear_search([11, 20], lambda x: x > 10) == 0


def test_closest_value():
    assert closest_value([1, 5, 9], 6) == 5
    assert closest_value([1, 5, 9], 8) == 9
    assert closest_value([4], 100) == 4
    with pytest.raises(ValueError):
        closest_value([], 1)
