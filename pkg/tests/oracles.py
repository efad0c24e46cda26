"""Independent reference implementations used by the tests."""

import math


def bilinear_oracle(az_grid, el_grid, gain, az, el):
    """Cell search by linear scan, wrap handled by extending the azimuth axis."""
    az_nodes = [float(a) for a in az_grid] + [float(az_grid[0]) + 360.0]
    rows = [list(map(float, r)) for r in gain] + [list(map(float, gain[0]))]
    a = float(az)
    while a < az_nodes[0]:
        a += 360.0
    while a >= az_nodes[0] + 360.0:
        a -= 360.0
    i = max(k for k in range(len(az_nodes) - 1) if az_nodes[k] <= a)
    t = (a - az_nodes[i]) / (az_nodes[i + 1] - az_nodes[i])
    e = min(max(float(el), float(el_grid[0])), float(el_grid[-1]))
    els = [float(v) for v in el_grid]
    j = max(k for k in range(len(els) - 1) if els[k] <= e) if e < els[-1] else len(els) - 2
    u = (e - els[j]) / (els[j + 1] - els[j])
    g00, g10 = rows[i][j], rows[i + 1][j]
    g01, g11 = rows[i][j + 1], rows[i + 1][j + 1]
    return (1 - u) * ((1 - t) * g00 + t * g10) + u * ((1 - t) * g01 + t * g11)


def fspl_oracle(distance_m, frequency_hz):
    """FSPL evaluated in 50-digit decimal arithmetic."""
    from decimal import Decimal, getcontext
    getcontext().prec = 50
    pi = Decimal("3.14159265358979323846264338327950288419716939937510")
    c = Decimal(299792458)
    x = 4 * pi * Decimal(repr(distance_m)) * Decimal(repr(frequency_hz)) / c
    return float(20 * x.log10())


def ols_oracle(x, y):
    """Slope and intercept from the textbook normal equations."""
    n = len(x)
    sx, sy = math.fsum(x), math.fsum(y)
    sxx = math.fsum(v * v for v in x)
    sxy = math.fsum(a * b for a, b in zip(x, y))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    return slope, (sy - slope * sx) / n


def quartiles_oracle(values):
    """Type-7 quantiles by sorting and linear interpolation."""
    s = sorted(values)
    out = []
    for q in (0.0, 0.25, 0.5, 0.75, 1.0):
        h = (len(s) - 1) * q
        lo = math.floor(h)
        hi = min(lo + 1, len(s) - 1)
        out.append(s[lo] + (h - lo) * (s[hi] - s[lo]))
    return out
