def count_occurrences(xs, target):
    count = 0
    i = 0
    while i < len(xs):
        if xs[i] == target:
            count = count + 1
        i = i + 1
    return count
