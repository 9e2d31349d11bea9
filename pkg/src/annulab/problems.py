"""Torsion and first-eigenvalue solves on an annulus, plus the shape-derivative BVP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import fem
from .fem import BoundaryFlux, DirichletSystem, SpdFactor
from .geometry import AnnulusSpec, vn_ambient
from .mesh import TriMesh, build_annulus_mesh


@dataclass(frozen=True, eq=False)
class Discretization:
    """Mesh and assembled operators shared by the solves on one annulus."""

    spec: AnnulusSpec
    level: int
    mesh: TriMesh
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    unit_load: np.ndarray  # load for f = -1, i.e. int phi_i dV
    dirichlet: DirichletSystem
    factor: SpdFactor

    @classmethod
    def build(cls, spec: AnnulusSpec, level: int) -> "Discretization":
        mesh = build_annulus_mesh(spec, level)
        K = fem.assemble_stiffness(mesh)
        M = fem.assemble_weighted_mass(mesh, spec.geom)
        F = fem.assemble_load(mesh, spec.geom, -1.0)
        dirichlet = fem.apply_dirichlet(K, mesh.boundary_nodes)
        return cls(spec, level, mesh, K, M, F, dirichlet, SpdFactor(dirichlet.matrix))

    def integrate(self, values: np.ndarray) -> float:
        """``int v dV`` for a P1 field (quadrature consistent with the mass matrix)."""
        return float(self.unit_load @ values)


@dataclass(frozen=True, eq=False)
class TorsionSolution:
    spec: AnnulusSpec
    mesh: TriMesh
    y: np.ndarray
    J: float
    energy: float
    inner_flux: BoundaryFlux
    disc: Discretization


@dataclass(frozen=True, eq=False)
class EigenSolution:
    spec: AnnulusSpec
    mesh: TriMesh
    lambda1: float
    y1: np.ndarray
    inner_flux: BoundaryFlux
    disc: Discretization

    @property
    def J1(self) -> float:
        # -int(|grad y1|^2 - 2 lam y1^2) dV = -(lam - 2 lam) = lam
        return self.lambda1


def _disc(spec: AnnulusSpec, level: int, disc: Discretization | None) -> Discretization:
    if disc is None:
        return Discretization.build(spec, level)
    if disc.spec != spec or disc.level != level:
        raise ValueError("discretization was built for a different spec or level")
    return disc


def solve_torsion(spec: AnnulusSpec, level: int, disc: Discretization | None = None) -> TorsionSolution:
    """``-Delta y = 1`` in the annulus, ``y = 0`` on both circles."""
    d = _disc(spec, level, disc)
    ds = d.dirichlet
    y = ds.embed(d.factor.solve(ds.rhs(d.unit_load)))
    J = d.integrate(y)
    energy = float(y @ (d.stiffness @ y))
    flux = fem.recover_inner_flux(d.mesh, spec.geom, y, d.unit_load, d.stiffness)
    return TorsionSolution(spec, d.mesh, y, J, energy, flux, d)


def solve_eigen(
    spec: AnnulusSpec, level: int, disc: Discretization | None = None, start: np.ndarray | None = None
) -> EigenSolution:
    """Smallest Dirichlet eigenpair; ``y1 > 0`` with ``int y1^2 dV = 1``.

    Inverse iteration starts from the torsion function unless ``start`` is
    given; it is positive and already close to the ground state.
    """
    d = _disc(spec, level, disc)
    ds = d.dirichlet
    M_I = fem.apply_dirichlet(d.mass, d.mesh.boundary_nodes).matrix
    x0 = ds.restrict(start) if start is not None else d.factor.solve(ds.rhs(d.unit_load))
    lam, u = fem.smallest_eigenpair(ds.matrix, M_I, x0=x0, factor=d.factor)
    y1 = ds.embed(u)
    flux = fem.recover_inner_flux(d.mesh, spec.geom, y1, lam * (d.mass @ y1), d.stiffness)
    return EigenSolution(spec, d.mesh, lam, y1, flux, d)


def solve_shape_bvp(torsion: TorsionSolution, t0: float | None = None) -> tuple[np.ndarray, float]:
    """Shape derivative ``y'`` for the axis-translation field, and ``int y' dV``.

    ``y'`` is harmonic (in the chart as well, by conformal invariance) with
    boundary values ``-(dy/dn) <V, n>`` on the inner circle and zero on the
    outer one, where the field vanishes.
    """
    spec = torsion.spec
    if t0 is None:
        t0 = spec.t
    elif t0 != spec.t:
        raise ValueError(f"t0={t0} does not match the solved offset {spec.t}")
    d = torsion.disc
    flux = torsion.inner_flux
    vn = vn_ambient(spec.geom, t0, spec.r0, flux.points)
    g = np.zeros(d.mesh.n_nodes)
    g[flux.nodes] = -flux.metric * vn
    gb = g[d.dirichlet.boundary]
    zero = np.zeros(d.mesh.n_nodes)
    yp = d.dirichlet.embed(d.factor.solve(d.dirichlet.rhs(zero, gb)), gb)
    return yp, d.integrate(yp)

