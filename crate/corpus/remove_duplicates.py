def remove_duplicates(xs):
    seen = []
    out = []
    for x in xs:
        found = False
        for y in seen:
            if x == y:
                found = True
        if not found:
            seen.append(x)
            out.append(x)
    return out
