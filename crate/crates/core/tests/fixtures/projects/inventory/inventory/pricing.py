def apply_discount(price, percent):
    if percent < 0 or percent > 100:
        raise ValueError("percent out of range")
    return round(price * (100 - percent) / 100, 2)


def bulk_price(unit_price, quantity, tiers):
    rate = 0
    for minimum, discount in sorted(tiers):
        if quantity >= minimum:
            rate = discount
    return apply_discount(unit_price * quantity, rate)


def price_range(items):
    if not items:
        return None
    low = min(item.price for item in items)
    high = max(item.price for item in items)
    return low, high


class Settings:
    def __init__(self, values):
        self.values = dict(values)


def config_value(config, key, default=None):
    section = config.values
    if key not in section:
        return default
    return section[key]


def cheapest(items):
    best = None
    for item in items:
        if best is None or item.price < best.price:
            best = item
    if best is None:
        raise LookupError("no items")
    return best.sku
