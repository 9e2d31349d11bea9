"""Reference solutions on concentric annuli.

With the balls concentric, the torsion function is radial and solves
``(sn u')' = -sn`` with ``sn = sin, r, sinh``; it has a closed form.  The
first Dirichlet eigenvalue is the first eigenvalue of the radial
Sturm-Liouville problem ``(sn phi')' + lam sn phi = 0``, computed here by
shooting and cross-checked by a 1-D finite-element solve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import OracleError
from .geometry import AnnulusSpec, SpaceForm

SHOOT_STEPS = 10_000
FEM_INTERVALS = 10_000
LAMBDA_RTOL = 1e-9
DUAL_METHOD_RTOL = 1e-6


def _particular(geom: SpaceForm, r):
    if geom is SpaceForm.SPHERICAL:
        return np.log(np.sin(r)), 1.0 / np.tan(r), -1.0 / np.sin(r) ** 2
    if geom is SpaceForm.HYPERBOLIC:
        return -np.log(np.sinh(r)), -1.0 / np.tanh(r), 1.0 / np.sinh(r) ** 2
    return -0.25 * r * r, -0.5 * r, -0.5 * np.ones_like(r)


def _homogeneous(geom: SpaceForm, r):
    """Non-constant radial harmonic function and its first two derivatives."""
    if geom is SpaceForm.SPHERICAL:
        return np.log(np.tan(0.5 * r)), 1.0 / np.sin(r), -np.cos(r) / np.sin(r) ** 2
    if geom is SpaceForm.HYPERBOLIC:
        return np.log(np.tanh(0.5 * r)), 1.0 / np.sinh(r), -np.cosh(r) / np.sinh(r) ** 2
    return np.log(r), 1.0 / r, -1.0 / (r * r)


def _check_radii(geom: SpaceForm, r0: float, r1: float) -> None:
    AnnulusSpec(geom, r0, r1, 0.0)


@dataclass(frozen=True)
class RadialTorsion:
    """``u(r) = particular(r) + C * harmonic(r) + D`` with ``u(r0) = u(r1) = 0``."""

    geom: SpaceForm
    r0: float
    r1: float
    C: float
    D: float

    def u(self, r):
        r = np.asarray(r, dtype=float)
        return _particular(self.geom, r)[0] + self.C * _homogeneous(self.geom, r)[0] + self.D

    def du(self, r):
        r = np.asarray(r, dtype=float)
        return _particular(self.geom, r)[1] + self.C * _homogeneous(self.geom, r)[1]

    def d2u(self, r):
        r = np.asarray(r, dtype=float)
        return _particular(self.geom, r)[2] + self.C * _homogeneous(self.geom, r)[2]

    def laplacian(self, r):
        """Radial Laplace-Beltrami operator ``u'' + (sn'/sn) u'``; equals -1."""
        r = np.asarray(r, dtype=float)
        return self.d2u(r) + self.geom.cs(r) / self.geom.sn(r) * self.du(r)

    def max_value(self, samples: int = 20_001) -> float:
        r = np.linspace(self.r0, self.r1, samples)
        return float(np.max(self.u(r)))


def radial_torsion(geom: SpaceForm, r0: float, r1: float) -> RadialTorsion:
    _check_radii(geom, r0, r1)
    p0, p1 = _particular(geom, np.array([r0, r1]))[0]
    h0, h1 = _homogeneous(geom, np.array([r0, r1]))[0]
    C = -(p1 - p0) / (h1 - h0)
    D = -p0 - C * h0
    return RadialTorsion(geom, float(r0), float(r1), float(C), float(D))


def radial_J(geom: SpaceForm, r0: float, r1: float) -> float:
    """``int u dV = 2 pi int u(r) sn(r) dr`` over the concentric annulus."""
    rt = radial_torsion(geom, r0, r1)
    val, err = scipy.integrate.quad(lambda r: rt.u(r) * geom.sn(r), r0, r1, epsabs=1e-13, epsrel=1e-13, limit=200)
    if err > 1e-10:
        raise OracleError(f"radial J quadrature error estimate {err:.2e} too large")
    return float(2.0 * np.pi * val)


# --------------------------------------------------------------------------
# radial eigenvalue


def _crossed(lam: float, geom: SpaceForm, r0: float, r1: float, steps: int) -> bool:
    """True iff the shooting solution vanishes somewhere in ``(r0, r1]``, i.e. lam >= lambda_1."""
    end, changes = kernels.shoot(float(lam), float(r0), float(r1), int(steps), int(geom.curvature))
    return changes > 0 or end == 0.0


def radial_lambda1_shooting(
    geom: SpaceForm, r0: float, r1: float, steps: int = SHOOT_STEPS, rtol: float = LAMBDA_RTOL
) -> float:
    """First radial Dirichlet eigenvalue by RK4 shooting and bisection."""
    _check_radii(geom, r0, r1)
    lo, hi = 0.0, (np.pi / (r1 - r0)) ** 2
    for _ in range(60):
        if _crossed(hi, geom, r0, r1, steps):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise OracleError(f"could not bracket lambda_1 for {geom.tag} r0={r0} r1={r1} (last hi={hi:g})")
    if _crossed(lo, geom, r0, r1, steps):
        raise OracleError(f"lower bracket {lo:g} already past the first eigenvalue")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if _crossed(mid, geom, r0, r1, steps):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def radial_lambda1_fem(geom: SpaceForm, r0: float, r1: float, intervals: int = FEM_INTERVALS) -> float:
    """First radial eigenvalue from a 1-D P1 discretization with 3-point Gauss quadrature."""
    _check_radii(geom, r0, r1)
    r = np.linspace(r0, r1, intervals + 1)
    h = np.diff(r)
    gx = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
    gw = np.array([5.0, 8.0, 5.0]) / 9.0
    xi = 0.5 * (gx + 1.0)  # on [0, 1]
    pts = r[:-1, None] + h[:, None] * xi[None, :]
    s = geom.sn(pts)
    wq = 0.5 * gw[None, :] * h[:, None]
    k_e = (s * wq).sum(axis=1) / h**2
    phi = np.stack([1.0 - xi, xi])  # (2, 3)
    m_e = np.einsum("eq,aq,bq->eab", s * wq, phi, phi)

    n = intervals + 1
    i = np.arange(intervals)
    rows = np.concatenate([i, i, i + 1, i + 1])
    cols = np.concatenate([i, i + 1, i, i + 1])
    K = sp.coo_matrix((np.concatenate([k_e, -k_e, -k_e, k_e]), (rows, cols)), shape=(n, n)).tocsc()
    M = sp.coo_matrix(
        (np.concatenate([m_e[:, 0, 0], m_e[:, 0, 1], m_e[:, 1, 0], m_e[:, 1, 1]]), (rows, cols)), shape=(n, n)
    ).tocsc()
    K, M = K[1:-1, 1:-1], M[1:-1, 1:-1]
    vals = spla.eigsh(K, k=1, M=M, sigma=0.0, which="LM", return_eigenvectors=False)
    return float(vals[0])


def radial_lambda1(geom: SpaceForm, r0: float, r1: float, cross_check: bool = True) -> float:
    """First Dirichlet eigenvalue of the concentric annulus.

    Shooting is authoritative; with ``cross_check`` the 1-D FEM value must
    agree to :data:`DUAL_METHOD_RTOL` or :class:`OracleError` is raised.
    """
    lam = radial_lambda1_shooting(geom, r0, r1)
    if cross_check:
        lam_fem = radial_lambda1_fem(geom, r0, r1)
        rel = abs(lam_fem - lam) / lam
        if rel > DUAL_METHOD_RTOL:
            raise OracleError(
                f"shooting ({lam:.12g}) and 1-D FEM ({lam_fem:.12g}) disagree: rel. diff {rel:.2e} > {DUAL_METHOD_RTOL:g}"
            )
    return lam
