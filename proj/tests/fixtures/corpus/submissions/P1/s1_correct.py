def rotated_palindrome(s):
    for i in range(len(s)):
        r = s[i:] + s[:i]
        if r == r[::-1]:
            return True
    return False
