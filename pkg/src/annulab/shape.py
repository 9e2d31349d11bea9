"""Hadamard boundary-integral derivatives of J and lambda_1 along the offset family.

For the field translating the inner ball along the axis (and vanishing on
the outer circle), the derivatives of ``j(t) = J`` and ``j1(t) = lambda_1``
reduce to integrals over the inner circle of ``(dy/dn)^2 <V, n>``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import AnnulabError, DegenerateConfigurationError, GeometryError
from .fem import BoundaryFlux
from .geometry import GEOM_TOL, AnnulusSpec, SpaceForm
from .problems import Discretization, EigenSolution, TorsionSolution, solve_eigen, solve_shape_bvp, solve_torsion

#: stationarity threshold at t = 0, relative to int |integrand| dS
ZERO_RTOL = 1e-6
#: half-domain criterion margin for reflection pairs
HALF_DOMAIN_MARGIN = 1e-8


class SweepError(AnnulabError, RuntimeError):
    def __init__(self, t: float, cause: Exception):
        super().__init__(f"sweep failed at t={t!r}: {type(cause).__name__}: {cause}")
        self.t = t
        self.cause = cause


@dataclass(frozen=True)
class BoundaryIntegral:
    value: float
    abs_value: float  # int |integrand| dS, the scale for zero tests

    @property
    def zero_tolerance(self) -> float:
        return ZERO_RTOL * self.abs_value


def hadamard_integral(flux: BoundaryFlux, spec: AnnulusSpec) -> BoundaryIntegral:
    """Trapezoid rule for ``int (dy/dn)^2 <V, n> dS`` over the inner loop."""
    vn = geometry.vn_ambient(spec.geom, spec.t, spec.r0, flux.points)
    # (metric flux)^2 * lambda dl == (euclidean flux)^2 / lambda dl
    f = flux.metric**2 * vn * flux.weight
    ell = flux.edge_lengths()
    nxt = np.roll(np.arange(f.size), -1)
    val = float(np.sum(0.5 * (f + f[nxt]) * ell))
    absval = float(np.sum(0.5 * (np.abs(f) + np.abs(f[nxt])) * ell))
    return BoundaryIntegral(val, absval)


def dJ_boundary(torsion: TorsionSolution) -> float:
    return hadamard_integral(torsion.inner_flux, torsion.spec).value


def dLambda_boundary(eigen: EigenSolution) -> float:
    return -hadamard_integral(eigen.inner_flux, eigen.spec).value


# --------------------------------------------------------------------------
# reflection pairs


@dataclass(frozen=True, eq=False)
class ReflectionReport:
    x: np.ndarray  # (P, 2) inner nodes on the half-domain side
    x_reflected: np.ndarray  # (P, 2)
    flux_abs: np.ndarray
    flux_abs_reflected: np.ndarray
    cos_beta: np.ndarray
    all_strict: bool
    max_outer_excursion: float = field(default=0.0)

    @property
    def pairs(self) -> list[tuple]:
        return list(zip(map(tuple, self.x), map(tuple, self.x_reflected), self.flux_abs, self.flux_abs_reflected, self.cos_beta))

    def __len__(self) -> int:
        return self.x.shape[0]


def _loop_angles(points: np.ndarray, center: float) -> np.ndarray:
    ang = np.unwrap(np.arctan2(points[:, 1], points[:, 0] - center))
    if ang[-1] < ang[0]:
        raise GeometryError("inner loop is not counterclockwise")
    return ang


def interpolate_on_loop(flux: BoundaryFlux, values: np.ndarray, center: float, points: np.ndarray) -> np.ndarray:
    """Linear interpolation of nodal loop values at points on the loop's circle.

    The parameter is the polar angle about the circle centre, proportional
    to arc length on the circle.
    """
    ang = _loop_angles(flux.points, center)
    per = np.append(ang, ang[0] + 2.0 * np.pi)
    vals = np.append(values, values[0])
    q = np.arctan2(points[:, 1], points[:, 0] - center)
    q = ang[0] + np.mod(q - ang[0], 2.0 * np.pi)
    return np.interp(q, per, vals)


def reflection_report(flux: BoundaryFlux, spec: AnnulusSpec) -> ReflectionReport:
    """Compare ``|dy/dn|`` at half-domain inner nodes with their mirror images."""
    geom, t0, r0 = spec.geom, spec.t, spec.r0
    if t0 == 0:
        raise DegenerateConfigurationError("reflection pairs need a nonzero offset")
    if t0 < 0:
        raise DegenerateConfigurationError(f"reflection pairs are defined for t0 > 0, got {t0}")
    mesh = flux.mesh
    pts = flux.points
    crit = geometry.half_domain_criterion(geom, t0, pts)
    sel = crit > HALF_DOMAIN_MARGIN
    x = pts[sel]
    xr = geometry.reflect(geom, t0, x)

    # the reflected half-domain must stay inside the outer ball
    side = geometry.half_domain_criterion(geom, t0, mesh.nodes) > 0
    excursion = float(np.max(mesh.outer_circle.distance_from(geometry.reflect(geom, t0, mesh.nodes[side])), initial=-np.inf))
    if excursion > GEOM_TOL:
        raise GeometryError(f"reflected half-domain leaves the outer ball by {excursion:.3e}")

    center = mesh.inner_circle.center
    fabs = np.abs(flux.metric)
    fr = interpolate_on_loop(flux, fabs, center, xr)
    cb = geometry.cos_beta(geom, t0, r0, x)
    strict = bool(x.shape[0] > 0 and np.all(fabs[sel] < fr))
    return ReflectionReport(x, xr, fabs[sel], fr, cb, strict, excursion)


# --------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = ("geom", "r0", "r1", "t", "L", "J", "lambda1", "dJ_bnd", "dJ_vol", "dlam_bnd", "dJ_fd", "dlam_fd")


@dataclass
class SweepRow:
    geom: str
    r0: float
    r1: float
    t: float
    L: int
    J: float
    lambda1: float
    dJ_bnd: float
    dJ_vol: float
    dlam_bnd: float
    dJ_fd: float
    dlam_fd: float
    # diagnostics, not part of the CSV
    dJ_zero_tol: float = math.nan
    dlam_zero_tol: float = math.nan
    reflect_torsion: bool | None = None
    reflect_eigen: bool | None = None
    min_torsion_margin: float = math.nan
    min_eigen_margin: float = math.nan
    torsion_flux_max: float = math.nan  # must be < 0 (Hopf)
    eigen_flux_max: float = math.nan
    torsion_min_interior: float = math.nan  # must be > 0 (maximum principle)
    eigen_min_interior: float = math.nan
    energy_residual: float = math.nan  # |J - int |grad y|^2| / |J|
    rayleigh_residual: float = math.nan

    def csv_values(self) -> list:
        return [getattr(self, c) for c in SWEEP_COLUMNS]


def _functionals(spec: AnnulusSpec, level: int) -> tuple[float, float]:
    d = Discretization.build(spec, level)
    tor = solve_torsion(spec, level, d)
    eig = solve_eigen(spec, level, d, start=tor.y)
    return tor.J, eig.lambda1


def sweep_row(geom: SpaceForm, r0: float, r1: float, t: float, level: int, delta: float) -> SweepRow:
    spec = AnnulusSpec(geom, r0, r1, t)
    d = Discretization.build(spec, level)
    tor = solve_torsion(spec, level, d)
    eig = solve_eigen(spec, level, d, start=tor.y)
    ij = hadamard_integral(tor.inner_flux, spec)
    il = hadamard_integral(eig.inner_flux, spec)
    _, dj_vol = solve_shape_bvp(tor)
    jp, lp = _functionals(spec.with_offset(t + delta), level)
    jm, lm = _functionals(spec.with_offset(t - delta), level)
    row = SweepRow(
        geom.tag, r0, r1, t, level, tor.J, eig.lambda1,
        ij.value, dj_vol, -il.value, (jp - jm) / (2 * delta), (lp - lm) / (2 * delta),
        dJ_zero_tol=ij.zero_tolerance, dlam_zero_tol=il.zero_tolerance,
        torsion_flux_max=float(tor.inner_flux.metric.max()),
        eigen_flux_max=float(eig.inner_flux.metric.max()),
        torsion_min_interior=float(d.dirichlet.restrict(tor.y).min()),
        eigen_min_interior=float(d.dirichlet.restrict(eig.y1).min()),
        energy_residual=abs(tor.J - tor.energy) / abs(tor.J),
        rayleigh_residual=abs(eig.lambda1 - float(eig.y1 @ (d.stiffness @ eig.y1))) / eig.lambda1,
    )
    if t > 0:
        rt = reflection_report(tor.inner_flux, spec)
        re = reflection_report(eig.inner_flux, spec)
        row.reflect_torsion, row.reflect_eigen = rt.all_strict, re.all_strict
        row.min_torsion_margin = float(np.min(rt.flux_abs_reflected - rt.flux_abs))
        row.min_eigen_margin = float(np.min(re.flux_abs_reflected - re.flux_abs))
    return row


def check_sweep_grid(r0: float, r1: float, t_values, delta: float) -> None:
    if not delta > 0:
        raise ValueError(f"finite-difference step must be positive, got {delta}")
    for t in t_values:
        if not abs(t) + delta < r1 - r0:
            raise GeometryError(f"offset t={t} with step {delta} leaves the admissible range |t| < {r1 - r0:g}")


def sweep(geom: SpaceForm, r0: float, r1: float, t_values, level: int, delta: float = 1e-3, progress=None) -> list[SweepRow]:
    """One :class:`SweepRow` per offset, in input order."""
    t_values = [float(t) for t in t_values]
    check_sweep_grid(r0, r1, t_values, delta)
    rows = []
    for t in t_values:
        try:
            rows.append(sweep_row(geom, r0, r1, t, level, delta))
        except AnnulabError as exc:
            raise SweepError(t, exc) from exc
        if progress is not None:
            progress(rows[-1])
    return rows
