import pytest

from inventory.models import Inventory, Item


def make():
    inv = Inventory()
    inv.add(Item("A1", "Apple", 0.5, 10))
    inv.add(Item("B2", "Banana", 0.25, 0))
    inv.add(Item("C3", "apricot", 2.0, 3))
    return inv


def test_item_value():
    assert Item("X", "x", 2.5, 4).total_value() == 10.0
    assert Item("X", "x", 2.5).total_value() == 0


def test_item_rejects_negative_price():
    with pytest.raises(ValueError):
        Item("X", "x", -1)


def test_item_available():
    assert Item("X", "x", 1, 1).is_available()
    assert not Item("X", "x", 1, 0).is_available()


def test_item_to_dict():
    assert Item("X", "Ex", 1.5, 2).to_dict() == {"sku": "X", "name": "Ex", "price": 1.5, "quantity": 2}


def test_add_and_get():
    inv = make()
    assert inv.get("A1").name == "Apple"
    assert inv.log == [("add", "A1"), ("add", "B2"), ("add", "C3")]
    with pytest.raises(KeyError):
        inv.add(Item("A1", "Again", 1.0))
    with pytest.raises(KeyError):
        inv.get("ZZ")


def test_remove():
    inv = make()
    assert inv.remove("B2").sku == "B2"
    assert sorted(inv.items) == ["A1", "C3"]
    assert inv.log[-1] == ("remove", "B2")
    with pytest.raises(KeyError):
        inv.remove("B2")


def test_restock():
    inv = make()
    assert inv.restock("B2", 5) == 5
    assert inv.get("B2").quantity == 5
    assert inv.log[-1] == ("restock", "B2")
    with pytest.raises(ValueError):
        inv.restock("B2", 0)


def test_sell():
    inv = make()
    assert inv.sell("A1", 4) == 2.0
    assert inv.get("A1").quantity == 6
    assert inv.log[-1] == ("sell", "A1")
    assert inv.sell("A1", 6) == 3.0
    with pytest.raises(ValueError):
        inv.sell("A1", 1)


def test_total_value():
    assert make().total_value() == 11.0
    assert Inventory().total_value() == 0


def test_low_stock():
    assert make().low_stock(5) == ["B2", "C3"]
    assert make().low_stock(3) == ["B2"]


def test_find_by_name():
    assert make().find_by_name("ap") == ["A1", "C3"]
    assert make().find_by_name("BAN") == ["B2"]
    assert make().find_by_name("z") == []
