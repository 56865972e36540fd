import pytest

from inventory.models import Item
from inventory.pricing import Settings, apply_discount, bulk_price, cheapest, config_value, price_range


def test_apply_discount():
    assert apply_discount(200, 25) == 150.0
    assert apply_discount(10, 0) == 10.0
    assert apply_discount(10, 100) == 0.0
    with pytest.raises(ValueError):
        apply_discount(10, 101)
    with pytest.raises(ValueError):
        apply_discount(10, -1)


def test_bulk_price():
    tiers = [(10, 5), (50, 10), (100, 20)]
    assert bulk_price(2.0, 5, tiers) == 10.0
    assert bulk_price(2.0, 10, tiers) == 19.0
    assert bulk_price(1.0, 60, tiers) == 54.0
    assert bulk_price(1.0, 100, tiers) == 80.0


def test_price_range():
    items = [Item("A", "a", 3.0), Item("B", "b", 1.0), Item("C", "c", 2.0)]
    assert price_range(items) == (1.0, 3.0)
    assert price_range([]) is None


def test_config_value():
    cfg = Settings({"currency": "EUR"})
    assert config_value(cfg, "currency") == "EUR"
    assert config_value(cfg, "missing", 7) == 7
    assert config_value(cfg, "missing") is None


def test_cheapest():
    items = [Item("A", "a", 3.0), Item("B", "b", 1.0), Item("C", "c", 2.0)]
    assert cheapest(items) == "B"
    with pytest.raises(LookupError):
        cheapest([])
