def sieve(n):
    is_p = [True] * (n + 1)
    primes = []
    p = 2
    while p <= n:
        if is_p[p]:
            primes.append(p)
            m = p * p
            while m <= n:
                is_p[m] = False
                m = m + p
        p = p + 1
    return primes
