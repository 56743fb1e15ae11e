def rotate(point, c, s, axis):
    x = point[0]
    y = point[1]
    z = point[2]
    if axis == 0:
        ny = y * c - z * s
        nz = y * s + z * c
        return [x, ny, nz]
    if axis == 1:
        nx = x * c + z * s
        nz = z * c - x * s
        return [nx, y, nz]
    nx = x * c - y * s
    ny = x * s + y * c
    return [nx, ny, z]
