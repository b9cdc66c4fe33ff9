# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled blocker-loss kernel. See ``_kernels_py`` for the reference."""
import numpy as np
cimport numpy as cnp
from libc.math cimport atan, sqrt, log10, hypot, fabs, M_PI

cnp.import_array()

BACKEND = "cython"

cdef double _MIN_RESIDUAL = 1e-300


cdef inline double _edge(double excess, bint shadowed, double k) nogil:
    cdef double arg
    if excess < 0.0:
        excess = 0.0
    arg = (M_PI / 2) * sqrt(k * excess)
    if not shadowed:
        arg = -arg
    return atan(arg) / M_PI


cdef inline bint _precedes(const double[:] a, const double[:] b) nogil:
    cdef Py_ssize_t i
    for i in range(3):
        if a[i] != b[i]:
            return a[i] < b[i]
    return False


cdef double _one_link(const double[:] tx, const double[:] rx,
                      const double[:] bx, const double[:] by,
                      const double[:] width, const double[:] height,
                      double k, double relevance_radius,
                      double[:] s_buf, double[:] t_buf, double[:] w_buf, double[:] h_buf) nogil:
    cdef double ex = rx[0] - tx[0]
    cdef double ey = rx[1] - tx[1]
    cdef double dz = rx[2] - tx[2]
    cdef double dh = hypot(ex, ey)
    cdef double ux, uy, d, relx, rely, s, t, zr, s2, r2, a1, a2
    cdef double lat1, lat2, b1, b2, c1, c2, fw1, fw2, fh1, fh2, residual, loss, hj
    cdef double total = 0.0
    cdef Py_ssize_t j, m = 0, n = bx.shape[0]
    if dh == 0.0:
        return 0.0
    ux = ex / dh
    uy = ey / dh
    d = sqrt(dh * dh + dz * dz)
    c1 = tx[2]
    c2 = rx[2]
    # pass 1: keep blockers whose centre projects inside the link span
    for j in range(n):
        relx = bx[j] - tx[0]
        rely = by[j] - tx[1]
        s = relx * ux + rely * uy
        if s < 0.0 or s > dh:
            continue
        t = rely * ux - relx * uy
        if relevance_radius >= 0.0 and fabs(t) > relevance_radius:
            continue
        s_buf[m] = s
        t_buf[m] = t
        w_buf[m] = width[j]
        h_buf[m] = height[j]
        m += 1
    # pass 2: branch-light loss evaluation over the kept blockers
    for j in range(m):
        s = s_buf[j]
        t = t_buf[j]
        hj = h_buf[j]
        zr = tx[2] + dz * s / dh
        s2 = s * s
        r2 = (dh - s) * (dh - s)
        a1 = zr - tx[2]
        a2 = rx[2] - zr
        lat1 = t - 0.5 * w_buf[j]
        lat2 = t + 0.5 * w_buf[j]
        fw1 = _edge(sqrt(s2 + lat1 * lat1 + a1 * a1) + sqrt(r2 + lat1 * lat1 + a2 * a2) - d,
                    lat1 <= 0.0, k)
        fw2 = _edge(sqrt(s2 + lat2 * lat2 + a1 * a1) + sqrt(r2 + lat2 * lat2 + a2 * a2) - d,
                    lat2 >= 0.0, k)
        b1 = hj - tx[2]
        b2 = rx[2] - hj
        fh1 = _edge(sqrt(s2 + b1 * b1) + sqrt(r2 + b2 * b2) - d, zr <= hj, k)
        fh2 = _edge(sqrt(s2 + c1 * c1) + sqrt(r2 + c2 * c2) - d, zr >= 0.0, k)
        residual = 1.0 - (fh1 + fh2) * (fw1 + fw2)
        if residual < _MIN_RESIDUAL:
            residual = _MIN_RESIDUAL
        loss = -20.0 * log10(residual)
        if loss > 0.0:
            total += loss
    return total


def link_blockage_loss_db(tx, rx, bx, by, width, height, double wavelength,
                          double relevance_radius=-1.0):
    """Summed knife-edge loss in dB for each of L links over B blockers."""
    cdef const double[:, :] txv = np.ascontiguousarray(tx, dtype=np.float64).reshape(-1, 3)
    cdef const double[:, :] rxv = np.ascontiguousarray(rx, dtype=np.float64).reshape(-1, 3)
    cdef const double[:] bxv = np.ascontiguousarray(bx, dtype=np.float64)
    cdef const double[:] byv = np.ascontiguousarray(by, dtype=np.float64)
    cdef const double[:] wv = np.ascontiguousarray(width, dtype=np.float64)
    cdef const double[:] hv = np.ascontiguousarray(height, dtype=np.float64)
    cdef Py_ssize_t i, n_links = txv.shape[0]
    cdef double k = M_PI / wavelength
    cdef Py_ssize_t n = bxv.shape[0]
    out = np.zeros(n_links)
    cdef double[:] outv = out
    if n == 0:
        return out
    cdef double[:] s_buf = np.empty(n)
    cdef double[:] t_buf = np.empty(n)
    cdef double[:] w_buf = np.empty(n)
    cdef double[:] h_buf = np.empty(n)
    with nogil:
        for i in range(n_links):
            # evaluate from a canonical endpoint so swapping tx/rx is bit-exact
            if _precedes(rxv[i], txv[i]):
                outv[i] = _one_link(rxv[i], txv[i], bxv, byv, wv, hv, k, relevance_radius,
                                    s_buf, t_buf, w_buf, h_buf)
            else:
                outv[i] = _one_link(txv[i], rxv[i], bxv, byv, wv, hv, k, relevance_radius,
                                    s_buf, t_buf, w_buf, h_buf)
    return out
