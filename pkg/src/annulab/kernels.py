"""Hot numeric kernels.

Each kernel has a numba version (``*_jit``) and a numpy/python reference
(``*_np``).  The public names dispatch on :data:`annulab._accel.HAS_NUMBA`,
so ``ANNULAB_DISABLE_NUMBA=1`` switches the whole package to the fallback.
Both paths perform the same floating-point operations per element; results
agree to rounding (see ``benchmarks/bench_kernels.py``).

Mid-edge quadrature convention: quadrature point ``k`` of a triangle is the
midpoint of the edge opposite local vertex ``k``; its weight is ``area/3``.
"""
import math

import numpy as np

from ._accel import HAS_NUMBA, njit


# --------------------------------------------------------------------------
# P1 element matrices


def stiffness_local_np(x, y, tris):
    x0, x1, x2 = x[tris[:, 0]], x[tris[:, 1]], x[tris[:, 2]]
    y0, y1, y2 = y[tris[:, 0]], y[tris[:, 1]], y[tris[:, 2]]
    area = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
    b = np.stack([y1 - y2, y2 - y0, y0 - y1], axis=1)
    c = np.stack([x2 - x1, x0 - x2, x1 - x0], axis=1)
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area)[:, None, None]
    return ke, area


@njit
def stiffness_local_jit(x, y, tris):
    nt = tris.shape[0]
    ke = np.empty((nt, 3, 3))
    area = np.empty(nt)
    b = np.empty(3)
    c = np.empty(3)
    for e in range(nt):
        i0, i1, i2 = tris[e, 0], tris[e, 1], tris[e, 2]
        x0, x1, x2 = x[i0], x[i1], x[i2]
        y0, y1, y2 = y[i0], y[i1], y[i2]
        a = 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
        area[e] = a
        b[0] = y1 - y2
        b[1] = y2 - y0
        b[2] = y0 - y1
        c[0] = x2 - x1
        c[1] = x0 - x2
        c[2] = x1 - x0
        for i in range(3):
            for j in range(3):
                ke[e, i, j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * a)
    return ke, area


def mass_local_np(area, wmid):
    """Weighted P1 mass with mid-edge quadrature; ``wmid[e, k]`` is the weight at midpoint k."""
    s = area / 12.0  # (area/3) * (1/2)^2
    me = np.empty((area.shape[0], 3, 3))
    tot = wmid.sum(axis=1)
    for i in range(3):
        me[:, i, i] = s * (tot - wmid[:, i])
        for j in range(3):
            if j != i:
                me[:, i, j] = s * wmid[:, 3 - i - j]
    return me


@njit
def mass_local_jit(area, wmid):
    nt = area.shape[0]
    me = np.empty((nt, 3, 3))
    for e in range(nt):
        s = area[e] / 12.0
        tot = wmid[e, 0] + wmid[e, 1] + wmid[e, 2]
        for i in range(3):
            for j in range(3):
                if i == j:
                    me[e, i, j] = s * (tot - wmid[e, i])
                else:
                    me[e, i, j] = s * wmid[e, 3 - i - j]
    return me


def load_local_np(area, fmid):
    """Element load ``int fmid * phi_i`` with mid-edge quadrature."""
    s = area / 6.0  # (area/3) * (1/2)
    tot = fmid.sum(axis=1)
    return s[:, None] * (tot[:, None] - fmid)


@njit
def load_local_jit(area, fmid):
    nt = area.shape[0]
    fe = np.empty((nt, 3))
    for e in range(nt):
        s = area[e] / 6.0
        tot = fmid[e, 0] + fmid[e, 1] + fmid[e, 2]
        for i in range(3):
            fe[e, i] = s * (tot - fmid[e, i])
    return fe


# --------------------------------------------------------------------------
# Radial Sturm-Liouville shooting: (sn phi')' + lam sn phi = 0, phi(r0) = 0.


def _sn(kind, r):
    if kind == 1:
        return math.sin(r)
    if kind == -1:
        return math.sinh(r)
    return r


def shoot_np(lam, r0, r1, n, kind):
    """RK4 over ``n`` steps; returns ``(phi(r1), sign changes of phi in (r0, r1])``."""
    h = (r1 - r0) / n
    phi = 0.0
    psi = _sn(kind, r0)  # psi = sn * phi', phi'(r0) = 1
    changes = 0
    r = r0
    for k in range(n):
        s0 = _sn(kind, r)
        sm = _sn(kind, r + 0.5 * h)
        s1 = _sn(kind, r + h)
        k1p = psi / s0
        k1q = -lam * s0 * phi
        k2p = (psi + 0.5 * h * k1q) / sm
        k2q = -lam * sm * (phi + 0.5 * h * k1p)
        k3p = (psi + 0.5 * h * k2q) / sm
        k3q = -lam * sm * (phi + 0.5 * h * k2p)
        k4p = (psi + h * k3q) / s1
        k4q = -lam * s1 * (phi + h * k3p)
        new = phi + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        psi = psi + h * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
        if k > 0 and (new < 0.0) != (phi < 0.0):
            changes += 1
        phi = new
        r = r0 + (k + 1) * h
    return phi, changes


_sn_jit = njit(_sn)


@njit
def shoot_jit(lam, r0, r1, n, kind):
    h = (r1 - r0) / n
    phi = 0.0
    psi = _sn_jit(kind, r0)
    changes = 0
    r = r0
    for k in range(n):
        s0 = _sn_jit(kind, r)
        sm = _sn_jit(kind, r + 0.5 * h)
        s1 = _sn_jit(kind, r + h)
        k1p = psi / s0
        k1q = -lam * s0 * phi
        k2p = (psi + 0.5 * h * k1q) / sm
        k2q = -lam * sm * (phi + 0.5 * h * k1p)
        k3p = (psi + 0.5 * h * k2q) / sm
        k3q = -lam * sm * (phi + 0.5 * h * k2p)
        k4p = (psi + h * k3q) / s1
        k4q = -lam * s1 * (phi + h * k3p)
        new = phi + h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        psi = psi + h * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
        if k > 0 and (new < 0.0) != (phi < 0.0):
            changes += 1
        phi = new
        r = r0 + (k + 1) * h
    return phi, changes


if HAS_NUMBA:
    stiffness_local = stiffness_local_jit
    mass_local = mass_local_jit
    load_local = load_local_jit
    shoot = shoot_jit
else:
    stiffness_local = stiffness_local_np
    mass_local = mass_local_np
    load_local = load_local_np
    shoot = shoot_np
