def bubble_sort(items):
    result = list(items)
    n = len(result)
    for i in range(n):
        swapped = False
        for j in range(n - i - 1):
            if result[j] > result[j + 1]:
                result[j], result[j + 1] = result[j + 1], result[j]
                swapped = True
        if not swapped:
            break
    return result


def merge(left, right):
    merged = []
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged


def merge_sort(items):
    if len(items) <= 1:
        return list(items)
    middle = len(items) // 2
    return merge(merge_sort(items[:middle]), merge_sort(items[middle:]))


def kth_smallest(items, k):
    if not items:
        raise ValueError("empty input")
    pivot = items[0]
    below = [x for x in items if x < pivot]
    above = [x for x in items if x > pivot]
    num_less = len(below)
    num_lessoreq = len(items) - len(above)
    if k < num_less:
        return kth_smallest(below, k)
    if k >= num_lessoreq:
        return kth_smallest(above, k - num_lessoreq)
    return pivot


def insertion_sort(items):
    result = []
    for item in items:
        index = len(result)
        while index > 0 and result[index - 1] > item:
            index -= 1
        result.insert(index, item)
    return result
