"""Pure numpy fallback for the blocker-loss kernel.

Mirrors ``_kernels.pyx`` operation for operation so both backends agree to
rounding.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"

_MIN_RESIDUAL = 1e-300


def link_blockage_loss_db(tx, rx, bx, by, width, height, wavelength, relevance_radius=-1.0):
    """Summed knife-edge loss in dB for each of L links over B blockers.

    ``tx`` and ``rx`` are (L, 3) arrays, blocker arrays are (B,). A
    negative ``relevance_radius`` keeps every blocker.
    """
    tx = np.ascontiguousarray(tx, dtype=np.float64).reshape(-1, 3)
    rx = np.ascontiguousarray(rx, dtype=np.float64).reshape(-1, 3)
    bx = np.asarray(bx, dtype=np.float64)
    by = np.asarray(by, dtype=np.float64)
    width = np.asarray(width, dtype=np.float64)
    height = np.asarray(height, dtype=np.float64)
    out = np.zeros(len(tx))
    if len(bx) == 0:
        return out
    k = np.pi / wavelength
    for i in range(len(tx)):
        a, b = tx[i], rx[i]
        # evaluate from a canonical endpoint so swapping tx/rx is bit-exact
        if tuple(b) < tuple(a):
            a, b = b, a
        out[i] = _one_link(a, b, bx, by, width, height, k, relevance_radius)
    return out


def _one_link(tx, rx, bx, by, width, height, k, relevance_radius):
    ex = rx[0] - tx[0]
    ey = rx[1] - tx[1]
    dz = rx[2] - tx[2]
    dh = np.hypot(ex, ey)
    if dh == 0.0:
        return 0.0
    ux, uy = ex / dh, ey / dh
    d = np.sqrt(dh * dh + dz * dz)
    relx = bx - tx[0]
    rely = by - tx[1]
    s = relx * ux + rely * uy
    t = rely * ux - relx * uy
    sel = (s >= 0.0) & (s <= dh)
    if relevance_radius >= 0.0:
        sel &= np.abs(t) <= relevance_radius
    if not sel.any():
        return 0.0
    s, t, w, h = s[sel], t[sel], width[sel], height[sel]
    zr = tx[2] + dz * s / dh
    s2 = s * s
    r2 = (dh - s) * (dh - s)
    a1 = zr - tx[2]
    a2 = rx[2] - zr
    lat1 = t - 0.5 * w
    lat2 = t + 0.5 * w
    fw1 = _edge(np.sqrt(s2 + lat1 * lat1 + a1 * a1) + np.sqrt(r2 + lat1 * lat1 + a2 * a2) - d, lat1 <= 0.0, k)
    fw2 = _edge(np.sqrt(s2 + lat2 * lat2 + a1 * a1) + np.sqrt(r2 + lat2 * lat2 + a2 * a2) - d, lat2 >= 0.0, k)
    b1 = h - tx[2]
    b2 = rx[2] - h
    fh1 = _edge(np.sqrt(s2 + b1 * b1) + np.sqrt(r2 + b2 * b2) - d, zr <= h, k)
    c1 = tx[2]
    c2 = rx[2]
    fh2 = _edge(np.sqrt(s2 + c1 * c1) + np.sqrt(r2 + c2 * c2) - d, zr >= 0.0, k)
    residual = 1.0 - (fh1 + fh2) * (fw1 + fw2)
    loss = -20.0 * np.log10(np.maximum(residual, _MIN_RESIDUAL))
    return float(np.maximum(loss, 0.0).sum())


def _edge(excess, shadowed, k):
    arg = (np.pi / 2) * np.sqrt(k * np.maximum(excess, 0.0))
    return np.arctan(np.where(shadowed, arg, -arg)) / np.pi
