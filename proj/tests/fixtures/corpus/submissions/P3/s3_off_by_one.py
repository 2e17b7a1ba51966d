def count_ones(lst):
    lo, hi = 0, len(lst) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if lst[mid] == 1:
            hi = mid
        else:
            lo = mid + 1
    return len(lst) - lo
