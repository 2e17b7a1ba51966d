from itertools import groupby


def rle(s):
    return "".join(k + str(len(list(g))) for k, g in groupby(s))
