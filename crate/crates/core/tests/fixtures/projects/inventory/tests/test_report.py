import pytest

from inventory.models import Inventory, Item
from inventory.report import format_line, group_by_initial, parse_line, summary


def test_format_line():
    assert format_line(Item("A1", "Apple", 0.5, 10)) == "A1        10     0.50"


def test_summary():
    inv = Inventory()
    inv.add(Item("B", "b", 1.0, 2))
    inv.add(Item("A", "a", 2.0, 1))
    assert summary(inv) == "A          1     2.00\nB          2     1.00\ntotal: 4.00"


def test_parse_line():
    assert parse_line("A1 3 2.5") == ("A1", 3, 2.5)
    with pytest.raises(ValueError):
        parse_line("A1 3")


def test_group_by_initial():
    assert group_by_initial(["apple", "Avocado", "banana"]) == {"A": ["apple", "Avocado"], "B": ["banana"]}
    assert group_by_initial([]) == {}
