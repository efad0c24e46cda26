# cython: language_level=3
"""Compiled versions of the hot kernels in ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, sqrt, sin, cos, fabs, fmod, hypot, M_PI
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

cdef double WGS84_A = 6378137.0
cdef double WGS84_F = 1.0 / 298.257223563
cdef double WGS84_E2 = WGS84_F * (2.0 - WGS84_F)
cdef double RAD2DEG = 180.0 / M_PI


cdef Py_ssize_t _bisect_right(const double[:] grid, double v) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = grid.shape[0], mid
    while lo < hi:
        mid = (lo + hi) // 2
        if v < grid[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def bilinear_periodic(az_grid, el_grid, gain, az, el):
    cdef const double[:] ag = np.ascontiguousarray(az_grid, dtype=np.float64)
    cdef const double[:] eg = np.ascontiguousarray(el_grid, dtype=np.float64)
    cdef const double[:, :] g = np.ascontiguousarray(gain, dtype=np.float64)
    az_arr = np.ascontiguousarray(np.atleast_1d(az), dtype=np.float64)
    el_arr = np.ascontiguousarray(np.broadcast_to(el, az_arr.shape), dtype=np.float64)
    cdef const double[:] qa = az_arr.ravel()
    cdef const double[:] qe = el_arr.ravel()
    out = np.empty(qa.shape[0], dtype=np.float64)
    cdef double[:] o = out
    cdef Py_ssize_t n = ag.shape[0], m = eg.shape[0], k, i0, i1, j0
    cdef double a, e, lo, span, t, u, lower, upper
    with nogil:
        for k in range(qa.shape[0]):
            a = fmod(qa[k], 360.0)
            if a < 0.0:
                a += 360.0
            if a >= 360.0:
                a -= 360.0
            e = qe[k]
            if e < eg[0]:
                e = eg[0]
            elif e > eg[m - 1]:
                e = eg[m - 1]
            i0 = _bisect_right(ag, a) - 1
            if i0 < 0 or i0 >= n - 1:
                i0 = n - 1
                i1 = 0
                lo = ag[n - 1]
                span = ag[0] + 360.0 - lo
                if a < lo:
                    t = (a + 360.0 - lo) / span
                else:
                    t = (a - lo) / span
            else:
                i1 = i0 + 1
                lo = ag[i0]
                t = (a - lo) / (ag[i1] - lo)
            j0 = _bisect_right(eg, e) - 1
            if j0 < 0:
                j0 = 0
            if j0 > m - 2:
                j0 = m - 2
            u = (e - eg[j0]) / (eg[j0 + 1] - eg[j0])
            lower = (1.0 - t) * g[i0, j0] + t * g[i1, j0]
            upper = (1.0 - t) * g[i0, j0 + 1] + t * g[i1, j0 + 1]
            o[k] = (1.0 - u) * lower + u * upper
    return out.reshape(az_arr.shape)


def ecef_to_geodetic(x, y, z):
    xa = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    shape = xa.shape
    cdef const double[:] xv = xa.ravel()
    cdef const double[:] yv = np.ascontiguousarray(np.atleast_1d(y), dtype=np.float64).ravel()
    cdef const double[:] zv = np.ascontiguousarray(np.atleast_1d(z), dtype=np.float64).ravel()
    lat_out = np.empty(xv.shape[0], dtype=np.float64)
    lon_out = np.empty(xv.shape[0], dtype=np.float64)
    h_out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[:] lat_o = lat_out
    cdef double[:] lon_o = lon_out
    cdef double[:] h_o = h_out
    cdef Py_ssize_t k
    cdef int it
    cdef double p, lat, new, s, nrad, lon
    with nogil:
        for k in range(xv.shape[0]):
            p = hypot(xv[k], yv[k])
            lon = atan2(yv[k], xv[k])
            lat = atan2(zv[k], p * (1.0 - WGS84_E2))
            for it in range(12):
                s = sin(lat)
                nrad = WGS84_A / sqrt(1.0 - WGS84_E2 * s * s)
                new = atan2(zv[k] + WGS84_E2 * nrad * s, p)
                if fabs(new - lat) < 1e-15:
                    lat = new
                    break
                lat = new
            s = sin(lat)
            h_o[k] = p * cos(lat) + zv[k] * s - WGS84_A * sqrt(1.0 - WGS84_E2 * s * s)
            lat_o[k] = lat * RAD2DEG
            lon = lon * RAD2DEG
            if lon >= 180.0:
                lon -= 360.0
            lon_o[k] = lon
    return lat_out.reshape(shape), lon_out.reshape(shape), h_out.reshape(shape)


cdef int _cmp_double(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*>a)[0]
    cdef double y = (<const double*>b)[0]
    return (x > y) - (x < y)


def moving_median(t, values, double half_window):
    cdef const double[:] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[:] vv = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = tv.shape[0], i, j, lo = 0, hi = 0, w
    out = np.empty(n, dtype=np.float64)
    cdef double[:] o = out
    if n == 0:
        return out
    cdef double* buf = <double*>malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                while tv[lo] < tv[i] - half_window:
                    lo += 1
                if hi < i + 1:
                    hi = i + 1
                while hi < n and tv[hi] <= tv[i] + half_window:
                    hi += 1
                w = hi - lo
                for j in range(w):
                    buf[j] = vv[lo + j]
                qsort(buf, w, sizeof(double), _cmp_double)
                if w % 2 == 1:
                    o[i] = buf[w // 2]
                else:
                    o[i] = 0.5 * (buf[w // 2 - 1] + buf[w // 2])
    finally:
        free(buf)
    return out
