def count_ones(lst):
    total = 0
    for x in lst:
        if x == 1:
            total += 1
    return total
