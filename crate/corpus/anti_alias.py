def anti_alias(img):
    h = len(img)
    w = len(img[0])
    out = []
    for i in range(h):
        row = []
        for j in range(w):
            total = 0
            count = 0
            for di in range(-1, 2):
                for dj in range(-1, 2):
                    y = i + di
                    x = j + dj
                    if y >= 0 and y < h and x >= 0 and x < w:
                        total = total + img[y][x]
                        count = count + 1
            row.append(total // count)
        out.append(row)
    return out
