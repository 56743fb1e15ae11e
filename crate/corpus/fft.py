def fft(xs):
    n = len(xs)
    re = xs[:]
    im = [0.0] * n
    j = 0
    for i in range(1, n):
        bit = n // 2
        while bit > 0 and j >= bit:
            j = j - bit
            bit = bit // 2
        j = j + bit
        if i < j:
            t = re[i]
            re[i] = re[j]
            re[j] = t
    size = 2
    c = -1.0
    s = 0.0
    while size <= n:
        half = size // 2
        for start in range(0, n, size):
            wr = 1.0
            wi = 0.0
            for k in range(half):
                a = start + k
                b = a + half
                tr = wr * re[b] - wi * im[b]
                ti = wr * im[b] + wi * re[b]
                re[b] = re[a] - tr
                im[b] = im[a] - ti
                re[a] = re[a] + tr
                im[a] = im[a] + ti
                nwr = wr * c - wi * s
                wi = wr * s + wi * c
                wr = nwr
        s = -(((1.0 - c) / 2.0) ** 0.5)
        c = ((1.0 + c) / 2.0) ** 0.5
        size = size * 2
    return [re, im]
