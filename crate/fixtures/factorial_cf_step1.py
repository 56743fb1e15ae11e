n = int(input())
tmp = 1
m = 1
while n > 1:
    tmp = 2
    m = m * n
    n = n - 1
    tmp = 1
print(m)
