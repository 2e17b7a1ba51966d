def rle(s):
    return "".join(c + "1" for c in s)
