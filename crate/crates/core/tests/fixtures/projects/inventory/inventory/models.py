class Item:
    def __init__(self, sku, name, price, quantity=0):
        if price < 0:
            raise ValueError("price must be non-negative")
        self.sku = sku
        self.name = name
        self.price = price
        self.quantity = quantity

    def total_value(self):
        return self.price * self.quantity

    def is_available(self):
        return self.quantity > 0

    def to_dict(self):
        return {"sku": self.sku, "name": self.name, "price": self.price, "quantity": self.quantity}


class Inventory:
    def __init__(self):
        self.items = {}
        self.log = []

    def add(self, item):
        if item.sku in self.items:
            raise KeyError(item.sku)
        self.items[item.sku] = item
        self.log.append(("add", item.sku))

    def get(self, sku):
        item = self.items.get(sku)
        if item is None:
            raise KeyError(sku)
        return item

    def remove(self, sku):
        item = self.items.pop(sku, None)
        if item is None:
            raise KeyError(sku)
        self.log.append(("remove", sku))
        return item

    def restock(self, sku, amount):
        if amount <= 0:
            raise ValueError("amount must be positive")
        item = self.get(sku)
        item.quantity += amount
        self.log.append(("restock", sku))
        return item.quantity

    def sell(self, sku, amount):
        item = self.get(sku)
        if amount > item.quantity:
            raise ValueError("insufficient stock")
        item.quantity -= amount
        self.log.append(("sell", sku))
        return item.price * amount

    def total_value(self):
        total = 0
        for item in self.items.values():
            total += item.total_value()
        return total

    def low_stock(self, threshold):
        return sorted(sku for sku, item in self.items.items() if item.quantity < threshold)

    def find_by_name(self, prefix):
        matches = []
        for item in self.items.values():
            if item.name.lower().startswith(prefix.lower()):
                matches.append(item.sku)
        return sorted(matches)
