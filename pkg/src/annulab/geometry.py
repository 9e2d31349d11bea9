"""Two-dimensional space forms in conformal charts.

Charts
------
* sphere: stereographic projection from the antipode of the pole ``p``,
  ``lambda(x) = 2 / (1 + |x|^2)``;
* Euclidean plane: identity, ``lambda = 1``;
* hyperbolic plane: Poincare disk centred at ``p``,
  ``lambda(x) = 2 / (1 - |x|^2)``.

In every chart ``p`` is the origin and geodesic balls are Euclidean disks.
The chart x-axis carries the offset family ``q(t)``; chart point
``(u, v)`` lifts to the ambient vector ``(X1, X2, X3)`` with the chart
x-axis in the ``(X2, X3)``-plane, so the axis point at signed distance ``t``
lifts to ``(0, sin t, cos t)`` (sphere) or ``(0, sinh t, cosh t)``
(hyperboloid).  The Euclidean plane is lifted to the affine plane
``X3 = 1`` for uniformity.

All point arguments are arrays of shape ``(..., 2)`` and all functions are
vectorised over the leading axes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfigurationError, DomainError, GeometryError, InvalidPointError

#: tolerance for geometric identities (law of cosines, on-circle checks, ...)
GEOM_TOL = 1e-10
#: tolerance for algebraic round trips (inverse maps, involutions, ...)
ALG_TOL = 1e-12


class SpaceForm(enum.Enum):
    SPHERICAL = 1
    EUCLIDEAN = 0
    HYPERBOLIC = -1

    @property
    def curvature(self) -> int:
        return self.value

    @property
    def tag(self) -> str:
        return {1: "sph", 0: "euc", -1: "hyp"}[self.value]

    @classmethod
    def from_tag(cls, tag: str) -> "SpaceForm":
        table = {"sph": cls.SPHERICAL, "euc": cls.EUCLIDEAN, "hyp": cls.HYPERBOLIC}
        try:
            return table[tag]
        except KeyError:
            raise ValueError(f"unknown geometry tag {tag!r}; expected one of {sorted(table)}") from None

    def sn(self, r):
        """Radial density: ``sin``, identity or ``sinh``."""
        if self is SpaceForm.SPHERICAL:
            return np.sin(r)
        if self is SpaceForm.HYPERBOLIC:
            return np.sinh(r)
        return np.asarray(r, dtype=float)

    def cs(self, r):
        """Derivative of :meth:`sn`: ``cos``, 1 or ``cosh``."""
        if self is SpaceForm.SPHERICAL:
            return np.cos(r)
        if self is SpaceForm.HYPERBOLIC:
            return np.cosh(r)
        return np.ones_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class AnnulusSpec:
    """The domain ``B(p, r1)`` minus the closed ball ``B(q(t), r0)``."""

    geom: SpaceForm
    r0: float
    r1: float
    t: float = 0.0

    def __post_init__(self):
        if not isinstance(self.geom, SpaceForm):
            raise GeometryError(f"geom must be a SpaceForm, got {self.geom!r}")
        if not (0.0 < self.r0 < self.r1):
            raise GeometryError(f"need 0 < r0 < r1, got r0={self.r0}, r1={self.r1}")
        if self.geom is SpaceForm.SPHERICAL and not self.r1 < np.pi:
            raise GeometryError(f"spherical outer radius must be < pi, got {self.r1}")
        if not abs(self.t) < self.r1 - self.r0:
            raise GeometryError(f"|t| must be < r1 - r0 = {self.r1 - self.r0}, got t={self.t}")

    def with_offset(self, t: float) -> "AnnulusSpec":
        return AnnulusSpec(self.geom, self.r0, self.r1, t)


@dataclass(frozen=True)
class Circle2D:
    """Euclidean circle in the chart, centred on the x-axis."""

    center: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise GeometryError(f"circle radius must be positive, got {self.radius}")

    def points(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.stack([self.center + self.radius * np.cos(theta), self.radius * np.sin(theta)], axis=-1)

    def distance_from(self, x) -> np.ndarray:
        """Signed Euclidean distance of points ``x`` from the circle (positive outside)."""
        x = np.asarray(x, dtype=float)
        return np.hypot(x[..., 0] - self.center, x[..., 1]) - self.radius


# --------------------------------------------------------------------------
# charts


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError(f"expected points with trailing dimension 2, got shape {x.shape}")
    return x


def _check_chart(geom: SpaceForm, r2) -> None:
    if geom is SpaceForm.HYPERBOLIC and np.any(r2 >= 1.0):
        raise DomainError("hyperbolic chart points must satisfy |x| < 1")


def conformal_factor(geom: SpaceForm, x) -> np.ndarray:
    """Conformal weight ``lambda(x)``: the metric is ``lambda^2 (dx^2 + dy^2)``."""
    x = _as_points(x)
    r2 = np.sum(x * x, axis=-1)
    _check_chart(geom, r2)
    if geom is SpaceForm.SPHERICAL:
        return 2.0 / (1.0 + r2)
    if geom is SpaceForm.HYPERBOLIC:
        return 2.0 / (1.0 - r2)
    return np.ones_like(r2)


def model_radius(geom: SpaceForm, s):
    """Chart radius of the geodesic circle of radius ``s`` about the origin."""
    s = np.asarray(s, dtype=float)
    if geom is SpaceForm.SPHERICAL:
        if np.any(np.abs(s) >= np.pi):
            raise DomainError(f"spherical geodesic length must satisfy |s| < pi, got {s}")
        return np.tan(0.5 * s)
    if geom is SpaceForm.HYPERBOLIC:
        return np.tanh(0.5 * s)
    return s.copy() if s.ndim else s * 1.0


def geodesic_radius(geom: SpaceForm, m):
    """Inverse of :func:`model_radius`."""
    m = np.asarray(m, dtype=float)
    if geom is SpaceForm.SPHERICAL:
        return 2.0 * np.arctan(m)
    if geom is SpaceForm.HYPERBOLIC:
        if np.any(np.abs(m) >= 1.0):
            raise DomainError("hyperbolic chart radius must be < 1")
        return 2.0 * np.arctanh(m)
    return m.copy() if m.ndim else m * 1.0


def axis_point(geom: SpaceForm, t) -> np.ndarray:
    """Chart image of ``q(t)``."""
    m = model_radius(geom, t)
    return np.stack([m, np.zeros_like(m)], axis=-1)


def geodesic_ball_to_disk(geom: SpaceForm, t: float, r: float) -> Circle2D:
    """Chart image of the geodesic ball ``B(q(t), r)``."""
    if not r > 0:
        raise GeometryError(f"ball radius must be positive, got {r}")
    hi = float(model_radius(geom, t + r))
    lo = float(model_radius(geom, t - r))
    return Circle2D(0.5 * (hi + lo), 0.5 * (hi - lo))


def lift_to_ambient(geom: SpaceForm, x) -> np.ndarray:
    """Inverse chart into R^3 (sphere / hyperboloid / plane X3 = 1)."""
    x = _as_points(x)
    u, v = x[..., 0], x[..., 1]
    r2 = u * u + v * v
    _check_chart(geom, r2)
    if geom is SpaceForm.SPHERICAL:
        d = 1.0 + r2
        return np.stack([2.0 * v / d, 2.0 * u / d, (1.0 - r2) / d], axis=-1)
    if geom is SpaceForm.HYPERBOLIC:
        d = 1.0 - r2
        return np.stack([2.0 * v / d, 2.0 * u / d, (1.0 + r2) / d], axis=-1)
    return np.stack([v, u, np.ones_like(u)], axis=-1)


def project_to_chart(geom: SpaceForm, X) -> np.ndarray:
    """Inverse of :func:`lift_to_ambient`."""
    X = np.asarray(X, dtype=float)
    if geom is SpaceForm.EUCLIDEAN:
        return np.stack([X[..., 1], X[..., 0]], axis=-1)
    d = 1.0 + X[..., 2]
    return np.stack([X[..., 1] / d, X[..., 0] / d], axis=-1)


def ambient_dot(geom: SpaceForm, X, Y) -> np.ndarray:
    """Ambient bilinear form: Euclidean for the sphere, Minkowski for the hyperboloid."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if geom is SpaceForm.SPHERICAL:
        return np.sum(X * Y, axis=-1)
    if geom is SpaceForm.HYPERBOLIC:
        return X[..., 0] * Y[..., 0] + X[..., 1] * Y[..., 1] - X[..., 2] * Y[..., 2]
    return X[..., 0] * Y[..., 0] + X[..., 1] * Y[..., 1]


def geodesic_distance(geom: SpaceForm, x, y) -> np.ndarray:
    x = _as_points(x)
    y = _as_points(y)
    if geom is SpaceForm.SPHERICAL:
        # chord form: accurate for nearby points, unlike arccos of the dot product
        chord = np.linalg.norm(lift_to_ambient(geom, x) - lift_to_ambient(geom, y), axis=-1)
        return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))
    if geom is SpaceForm.HYPERBOLIC:
        nx = np.sum(x * x, axis=-1)
        ny = np.sum(y * y, axis=-1)
        _check_chart(geom, np.maximum(nx, ny))
        dxy = np.sum((x - y) ** 2, axis=-1)
        return np.arccosh(1.0 + 2.0 * dxy / ((1.0 - nx) * (1.0 - ny)))
    return np.linalg.norm(x - y, axis=-1)


# --------------------------------------------------------------------------
# offset family q(t), the vector field V and the inner normal


def axis_ambient(geom: SpaceForm, t: float) -> np.ndarray:
    """Ambient ``q(t)``."""
    if geom is SpaceForm.SPHERICAL:
        return np.array([0.0, np.sin(t), np.cos(t)])
    if geom is SpaceForm.HYPERBOLIC:
        return np.array([0.0, np.sinh(t), np.cosh(t)])
    return np.array([0.0, t, 1.0])


def axis_tangent(geom: SpaceForm, t: float) -> np.ndarray:
    """Ambient ``q'(t)``; a unit vector for the ambient form."""
    if geom is SpaceForm.SPHERICAL:
        return np.array([0.0, np.cos(t), -np.sin(t)])
    if geom is SpaceForm.HYPERBOLIC:
        return np.array([0.0, np.cosh(t), np.sinh(t)])
    return np.array([0.0, 1.0, 0.0])


def axis_field(geom: SpaceForm, X) -> np.ndarray:
    """The axis-translation field ``V`` at ambient points (cutoff equal to one)."""
    X = np.asarray(X, dtype=float)
    zero = np.zeros_like(X[..., 0])
    if geom is SpaceForm.SPHERICAL:
        return np.stack([zero, X[..., 2], -X[..., 1]], axis=-1)
    if geom is SpaceForm.HYPERBOLIC:
        return np.stack([zero, X[..., 2], X[..., 1]], axis=-1)
    return np.stack([zero, np.ones_like(zero), zero], axis=-1)


def _check_on_inner_circle(geom: SpaceForm, t0: float, r0: float, x) -> None:
    d = geodesic_distance(geom, axis_point(geom, t0), x)
    err = np.max(np.abs(d - r0)) if np.size(d) else 0.0
    if not err <= GEOM_TOL:
        raise InvalidPointError(
            f"points are not on the inner circle: max |d(q, x) - r0| = {err:.3e} > {GEOM_TOL:g}"
        )


def inner_normal(geom: SpaceForm, t0: float, r0: float, X) -> np.ndarray:
    """Ambient unit normal on ``dB(q(t0), r0)`` pointing into the inner ball."""
    X = np.asarray(X, dtype=float)
    q = axis_ambient(geom, t0)
    if geom is SpaceForm.EUCLIDEAN:
        n = q - X
        n[..., 2] = 0.0
        return n / r0
    return (q - geom.cs(r0) * X) / geom.sn(r0)


def vn_ambient(geom: SpaceForm, t0: float, r0: float, x, check: bool = True) -> np.ndarray:
    """Normal velocity ``<V, n>`` on the inner circle, from the ambient vectors.

    ``n`` points out of the annulus (into the inner ball).  Valid for every
    offset including ``t0 = 0``.
    """
    x = _as_points(x)
    if check:
        _check_on_inner_circle(geom, t0, r0, x)
    X = lift_to_ambient(geom, x)
    return ambient_dot(geom, axis_field(geom, X), inner_normal(geom, t0, r0, X))


def cos_beta(geom: SpaceForm, t0: float, r0: float, x, check: bool = True) -> np.ndarray:
    """Cosine of the angle at ``q(t0)`` of the triangle ``[p, q(t0), x]`` (law of cosines)."""
    if t0 == 0:
        raise DegenerateConfigurationError("cos beta is undefined at t0 = 0; use vn_ambient")
    if not t0 > 0:
        raise DegenerateConfigurationError(f"cos beta needs t0 > 0, got {t0}")
    x = _as_points(x)
    if check:
        _check_on_inner_circle(geom, t0, r0, x)
    a = geodesic_distance(geom, np.zeros(2), x)
    if geom is SpaceForm.SPHERICAL:
        return (np.cos(a) - np.cos(t0) * np.cos(r0)) / (np.sin(t0) * np.sin(r0))
    if geom is SpaceForm.HYPERBOLIC:
        return (np.cosh(t0) * np.cosh(r0) - np.cosh(a)) / (np.sinh(t0) * np.sinh(r0))
    return (t0 * t0 + r0 * r0 - a * a) / (2.0 * t0 * r0)


def half_domain_criterion(geom: SpaceForm, t0: float, x) -> np.ndarray:
    """``<lift(x), q'(t0)>``; positive on the side of increasing offset."""
    x = _as_points(x)
    if geom is SpaceForm.EUCLIDEAN:
        return x[..., 0] - t0
    return ambient_dot(geom, lift_to_ambient(geom, x), axis_tangent(geom, t0))


def reflect(geom: SpaceForm, t0: float, x) -> np.ndarray:
    """Reflection across the geodesic through ``q(t0)`` perpendicular to the axis."""
    x = _as_points(x)
    if geom is SpaceForm.EUCLIDEAN:
        out = x.copy()
        out[..., 0] = 2.0 * t0 - x[..., 0]
        return out
    X = lift_to_ambient(geom, x)
    nu = axis_tangent(geom, t0)
    Xr = X - 2.0 * ambient_dot(geom, X, nu)[..., None] * nu
    return project_to_chart(geom, Xr)


# --------------------------------------------------------------------------
# Mobius concentricization


@dataclass(frozen=True)
class MobiusMap:
    """``w = k (z - a) / (1 - z / b)`` on complex numbers, or the identity.

    The pole ``b`` is stored as ``binv = 1 / b`` so nearly concentric pairs,
    whose outer inverse point runs off to infinity, stay finite.  ``k > 0``
    gives the map positive derivative at ``a``; it tends to a translation
    as the circles become concentric.
    """

    a: float = 0.0
    binv: float = 0.0
    k: float = 1.0
    identity: bool = True

    @property
    def b(self) -> float:
        return np.inf if self.binv == 0 else 1.0 / self.binv

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.identity:
            return z.copy()
        return self.k * (z - self.a) / (1.0 - z * self.binv)

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        if self.identity:
            return w.copy()
        return (w + self.k * self.a) / (self.k + w * self.binv)


def mobius_concentricize(outer: Circle2D, inner: Circle2D) -> tuple[MobiusMap, float, float]:
    """Map sending an axis-centred nested circle pair to concentric circles.

    Returns ``(map, rho0, rho1)`` with the inner image radius ``rho0`` and
    outer image radius ``rho1``; the outer radius is preserved.
    """
    c1, R1 = float(outer.center), float(outer.radius)
    c0, R0 = float(inner.center), float(inner.radius)
    if not abs(c0 - c1) + R0 < R1:
        raise GeometryError("inner circle must lie strictly inside the outer circle")
    if c0 == c1:
        return MobiusMap(), R0, R1

    # The common inverse points a, b ((a - c)(b - c) = R^2 for both circles)
    # solve d z^2 - S z + C = 0; multiplying through by d = c1 - c0 keeps
    # the coefficients bounded as d -> 0, where one root escapes to infinity.
    d = c1 - c0
    S = c1 * c1 - c0 * c0 - R1 * R1 + R0 * R0
    C = (R1 * R1 - c1 * c1) * d + c1 * S
    disc = S * S - 4.0 * d * C
    if not disc > 0:
        raise GeometryError("circle pair has no real common inverse points")
    q = 0.5 * (S + np.copysign(np.sqrt(disc), S))
    small, big_inv = C / q, d / q  # roots are C/q and q/d
    if abs(small - c0) < R0:
        a, binv = small, big_inv
    else:
        a, binv = q / d, q / C
    if not (abs(a - c0) < R0 and abs(1.0 - c1 * binv) > R1 * abs(binv)):
        raise GeometryError("failed to separate common inverse points of the circle pair")

    raw = MobiusMap(a, binv, 1.0, identity=False)
    raw1 = abs(raw(c1 + R1))
    raw0 = abs(raw(c0 + R0))
    if not raw0 < raw1:
        raise GeometryError("image radii are not ordered; circle pair is degenerate")
    k = R1 / raw1
    if (1.0 - a * binv) < 0:
        k = -k
    return MobiusMap(a, binv, float(k), identity=False), float(R1 * raw0 / raw1), R1
