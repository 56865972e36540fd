def binary_search(items, target):
    lo, hi = 0, len(items) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        if items[mid] == target:
            return mid
        if items[mid] < target:
            lo = mid + 1
        else:
            hi = mid - 1
    return -1


def find_first_in_sorted(items, target):
    lo, hi = 0, len(items)
    while lo < hi:
        mid = (lo + hi) // 2
        if target == items[mid] and (mid == 0 or target != items[mid - 1]):
            return mid
        if target <= items[mid]:
            hi = mid
        else:
            lo = mid + 1
    return -1


def linear_search(items, predicate):
    for index, item in enumerate(items):
        if predicate(item):
            break
    else:
        return None
    return index


def closest_value(items, target):
    if not items:
        raise ValueError("empty input")
    best = items[0]
    for item in items:
        if abs(item - target) < abs(best - target):
            best = item
    return best
