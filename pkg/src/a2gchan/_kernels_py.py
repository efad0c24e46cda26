"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels_c.pyx`` operation for operation so both backends
agree to rounding; see :mod:`a2gchan.kernels` for the selection logic.
"""

from __future__ import annotations

import numpy as np

WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
WGS84_B = WGS84_A * (1.0 - WGS84_F)


def bilinear_periodic(az_grid, el_grid, gain, az, el):
    """Bilinear interpolation on an (azimuth, elevation) grid.

    Azimuth wraps with period 360; elevation is clamped to the grid edges.
    """
    az_grid = np.asarray(az_grid, dtype=np.float64)
    el_grid = np.asarray(el_grid, dtype=np.float64)
    gain = np.asarray(gain, dtype=np.float64)
    a = np.mod(np.asarray(az, dtype=np.float64), 360.0)
    a = np.where(a >= 360.0, a - 360.0, a)
    e = np.clip(np.asarray(el, dtype=np.float64), el_grid[0], el_grid[-1])

    n = az_grid.size
    m = el_grid.size
    i0 = np.searchsorted(az_grid, a, side="right") - 1
    wrap = (i0 < 0) | (i0 >= n - 1)
    i0 = np.where(wrap, n - 1, i0)
    i1 = np.where(wrap, 0, i0 + 1)
    lo = az_grid[i0]
    span = np.where(wrap, az_grid[0] + 360.0 - az_grid[n - 1], az_grid[i1] - lo)
    da = np.where(wrap & (a < lo), a + 360.0 - lo, a - lo)
    t = da / span

    j0 = np.searchsorted(el_grid, e, side="right") - 1
    j0 = np.clip(j0, 0, m - 2)
    j1 = j0 + 1
    u = (e - el_grid[j0]) / (el_grid[j1] - el_grid[j0])

    lower = (1.0 - t) * gain[i0, j0] + t * gain[i1, j0]
    upper = (1.0 - t) * gain[i0, j1] + t * gain[i1, j1]
    return (1.0 - u) * lower + u * upper


def ecef_to_geodetic(x, y, z):
    """Iterative WGS-84 inversion; returns (lat_deg, lon_deg, height_m)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    p = np.hypot(x, y)
    lon = np.arctan2(y, x)
    lat = np.arctan2(z, p * (1.0 - WGS84_E2))
    for _ in range(12):
        s = np.sin(lat)
        n_rad = WGS84_A / np.sqrt(1.0 - WGS84_E2 * s * s)
        new = np.arctan2(z + WGS84_E2 * n_rad * s, p)
        done = np.all(np.abs(new - lat) < 1e-15)
        lat = new
        if done:
            break
    s = np.sin(lat)
    h = p * np.cos(lat) + z * s - WGS84_A * np.sqrt(1.0 - WGS84_E2 * s * s)
    lon_deg = np.degrees(lon)
    lon_deg = np.where(lon_deg >= 180.0, lon_deg - 360.0, lon_deg)
    return np.degrees(lat), lon_deg, h


def moving_median(t, values, half_window):
    """Median of ``values`` over samples with ``|t_j - t_i| <= half_window``."""
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    lo = np.searchsorted(t, t - half_window, side="left")
    hi = np.searchsorted(t, t + half_window, side="right")
    out = np.empty_like(values)
    for i in range(values.size):
        out[i] = np.median(values[lo[i]:hi[i]])
    return out
