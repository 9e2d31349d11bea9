"""P1 finite elements on conformal charts.

In two dimensions the Dirichlet energy is conformally invariant:
``int g(grad u, grad v) dV = int grad u . grad v dx dy`` for
``g = lambda^2 (dx^2 + dy^2)``.  The stiffness matrix is therefore the
plain Euclidean P1 stiffness; the metric only enters through the weighted
mass ``int u v lambda^2 dx dy`` and the load.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import AssemblyError, SolverError
from .geometry import SpaceForm, conformal_factor
from .mesh import TriMesh

SOLVE_RTOL = 1e-12
EIG_RTOL = 1e-12
EIG_RESIDUAL_TOL = 1e-10
EIG_MAXITER = 10_000


def _coords(mesh: TriMesh):
    nodes = np.ascontiguousarray(mesh.nodes)
    return np.ascontiguousarray(nodes[:, 0]), np.ascontiguousarray(nodes[:, 1])


def _triplets_to_csr(tris: np.ndarray, local: np.ndarray, n: int) -> sp.csr_matrix:
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def midpoints(mesh: TriMesh) -> np.ndarray:
    """Mid-edge quadrature points, ``(T, 3, 2)``; point ``k`` is opposite vertex ``k``."""
    p = mesh.nodes[mesh.triangles]
    return 0.5 * (p[:, [1, 2, 0]] + p[:, [2, 0, 1]])


def _areas(mesh: TriMesh) -> np.ndarray:
    area = mesh.signed_areas()
    if np.any(area <= 0):
        raise AssemblyError(f"{int(np.sum(area <= 0))} degenerate or inverted triangle(s)")
    return area


def assemble_stiffness(mesh: TriMesh) -> sp.csr_matrix:
    x, y = _coords(mesh)
    tris = np.ascontiguousarray(mesh.triangles)
    ke, area = kernels.stiffness_local(x, y, tris)
    if np.any(area <= 0):
        raise AssemblyError(f"{int(np.sum(area <= 0))} degenerate or inverted triangle(s)")
    return _triplets_to_csr(tris, ke, mesh.n_nodes)


def assemble_weighted_mass(mesh: TriMesh, geom: SpaceForm) -> sp.csr_matrix:
    """``M_ij = int phi_i phi_j lambda^2 dx`` by mid-edge quadrature."""
    area = _areas(mesh)
    w = conformal_factor(geom, midpoints(mesh)) ** 2
    me = kernels.mass_local(area, np.ascontiguousarray(w))
    return _triplets_to_csr(mesh.triangles, me, mesh.n_nodes)


def assemble_load(mesh: TriMesh, geom: SpaceForm, f) -> np.ndarray:
    """Entries ``-int f phi_i dV`` so that ``K u = F`` solves ``Delta_g u = f``.

    ``f`` maps an array of chart points ``(..., 2)`` to values ``(...)``;
    a plain number is accepted as a constant.
    """
    area = _areas(mesh)
    mid = midpoints(mesh)
    lam2 = conformal_factor(geom, mid) ** 2
    fv = np.broadcast_to(np.asarray(f(mid) if callable(f) else f, dtype=float), lam2.shape)
    fe = kernels.load_local(area, np.ascontiguousarray(-fv * lam2))
    return np.bincount(mesh.triangles.ravel(), weights=fe.ravel(), minlength=mesh.n_nodes)


# --------------------------------------------------------------------------
# Dirichlet elimination and solves


@dataclass(frozen=True, eq=False)
class DirichletSystem:
    """Interior block of a system with the boundary rows/columns removed."""

    matrix: sp.csc_matrix  # A_II
    coupling: sp.csr_matrix  # A_IB
    interior: np.ndarray
    boundary: np.ndarray
    n: int

    def restrict(self, vec: np.ndarray) -> np.ndarray:
        return np.asarray(vec)[self.interior]

    def rhs(self, load: np.ndarray, boundary_values: np.ndarray | None = None) -> np.ndarray:
        """Interior right-hand side, lifting nonzero boundary data if given."""
        b = self.restrict(load).astype(float)
        if boundary_values is not None:
            b = b - self.coupling @ boundary_values
        return b

    def embed(self, x_interior: np.ndarray, boundary_values: np.ndarray | None = None) -> np.ndarray:
        u = np.zeros(self.n)
        u[self.interior] = x_interior
        if boundary_values is not None:
            u[self.boundary] = boundary_values
        return u


def apply_dirichlet(A: sp.spmatrix, boundary_nodes) -> DirichletSystem:
    A = sp.csr_matrix(A)
    n = A.shape[0]
    boundary = np.unique(np.asarray(boundary_nodes, dtype=np.int64))
    mask = np.ones(n, dtype=bool)
    mask[boundary] = False
    interior = np.flatnonzero(mask)
    if interior.size == 0:
        raise SolverError("Dirichlet elimination leaves no interior unknowns")
    A_I = A[interior]
    return DirichletSystem(A_I[:, interior].tocsc(), A_I[:, boundary].tocsr(), interior, boundary, n)


class SpdFactor:
    """Sparse LU factorization of an SPD matrix, with residual-checked solves.

    A short iterative refinement loop enforces the relative residual
    ``||A x - b|| / ||b|| <= rtol``.  On fine meshes that target can sit
    below what any double-precision ``x`` can reach; a solve is then also
    accepted once the residual is at the backward-stability floor
    ``BACKWARD_FLOOR * eps * ||A||_inf * ||x||``.
    """

    BACKWARD_FLOOR = 16.0

    def __init__(self, A: sp.spmatrix, rtol: float = SOLVE_RTOL, max_refine: int = 4):
        A = sp.csc_matrix(A)
        if A.shape[0] != A.shape[1]:
            raise SolverError(f"matrix must be square, got {A.shape}")
        asym = abs(A - A.T).max() if A.nnz else 0.0
        scale = abs(A).max() if A.nnz else 1.0
        if asym > 1e-14 * scale:
            raise SolverError(f"matrix is not symmetric (max |A - A^T| = {asym:.3e})")
        self.A = A
        self.norm_inf = float(abs(A).sum(axis=1).max()) if A.nnz else 0.0
        self.rtol = rtol
        self.max_refine = max_refine
        try:
            self._lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise SolverError(f"factorization failed: {exc}") from exc
        if np.any(self._lu.U.diagonal() <= 0):
            raise SolverError("matrix is not positive definite (non-positive pivot)")

    @property
    def shape(self):
        return self.A.shape

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        nb = np.linalg.norm(b)
        if nb == 0:
            return np.zeros_like(b)
        x = self._lu.solve(b)
        for _ in range(self.max_refine + 1):
            r = b - self.A @ x
            nr = np.linalg.norm(r)
            floor = self.BACKWARD_FLOOR * np.finfo(float).eps * self.norm_inf * np.linalg.norm(x)
            if nr <= self.rtol * nb or nr <= floor:
                return x
            x = x + self._lu.solve(r)
        raise SolverError(f"relative residual {nr / nb:.3e} exceeds {self.rtol:g} after refinement")


def solve_spd(A: sp.spmatrix, b: np.ndarray, rtol: float = SOLVE_RTOL) -> np.ndarray:
    return SpdFactor(A, rtol=rtol).solve(b)


def smallest_eigenpair(
    K: sp.spmatrix,
    M: sp.spmatrix,
    x0: np.ndarray | None = None,
    factor: SpdFactor | None = None,
    tol: float = EIG_RTOL,
    residual_tol: float = EIG_RESIDUAL_TOL,
    maxiter: int = EIG_MAXITER,
) -> tuple[float, np.ndarray]:
    """Smallest ``lam`` with ``K u = lam M u`` by unshifted inverse iteration.

    ``u`` is returned M-normalised with positive sum.  A positive start
    vector close to the ground state (e.g. the torsion function) speeds up
    convergence considerably.
    """
    K = sp.csr_matrix(K)
    M = sp.csr_matrix(M)
    if K.shape != M.shape:
        raise SolverError(f"K and M shapes differ: {K.shape} vs {M.shape}")
    factor = factor or SpdFactor(K)
    u = np.ones(K.shape[0]) if x0 is None else np.array(x0, dtype=float)
    u /= np.sqrt(u @ (M @ u))
    k_scale = abs(K).sum(axis=1).max()
    lam_old = u @ (K @ u)
    for it in range(1, maxiter + 1):
        v = factor.solve(M @ u)
        v /= np.sqrt(v @ (M @ v))
        Kv = K @ v
        lam = v @ Kv
        res = np.linalg.norm(Kv - lam * (M @ v))
        u = v
        if abs(lam - lam_old) < tol * abs(lam) and res <= residual_tol * np.linalg.norm(u) * k_scale:
            break
        lam_old = lam
    else:
        raise SolverError(f"inverse iteration did not converge in {maxiter} iterations (residual {res:.3e})")
    if u.sum() < 0:
        u = -u
    return float(lam), u


# --------------------------------------------------------------------------
# flux recovery


@dataclass(frozen=True, eq=False)
class BoundaryFlux:
    """Normal derivative on the inner loop, outward from the annulus (into the inner ball).

    ``metric`` is the Riemannian normal derivative, ``euclidean`` the chart
    one; they differ by the conformal factor ``weight`` at each node.
    """

    mesh: TriMesh
    nodes: np.ndarray
    euclidean: np.ndarray
    weight: np.ndarray

    @property
    def metric(self) -> np.ndarray:
        return self.euclidean / self.weight

    @property
    def points(self) -> np.ndarray:
        return self.mesh.nodes[self.nodes]

    def edge_lengths(self) -> np.ndarray:
        """Euclidean length of loop segment ``k -> k+1`` (cyclic)."""
        p = self.points
        return np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)


def boundary_mass(lengths: np.ndarray) -> sp.csc_matrix:
    """Cyclic 1-D P1 mass matrix for a closed polyline with the given segment lengths."""
    n = lengths.size
    if n < 3 or np.any(lengths <= 0):
        raise SolverError("degenerate boundary loop")
    prev = np.roll(lengths, 1)
    i = np.arange(n)
    j = (i + 1) % n
    rows = np.concatenate([i, i, j])
    cols = np.concatenate([i, j, i])
    vals = np.concatenate([(lengths + prev) / 3.0, lengths / 6.0, lengths / 6.0])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()


def _coarse_trace_flux(resid: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    # test with coarse hats phi_2J + (phi_2J-1 + phi_2J+1)/2, solve on the
    # even-node loop, interpolate back to odd nodes
    odd = resid[1::2]
    coarse_resid = resid[0::2] + 0.5 * (odd + np.roll(odd, 1))
    coarse_len = lengths[0::2] + lengths[1::2]
    gc = spla.spsolve(boundary_mass(coarse_len), coarse_resid)
    w = lengths[0::2] / coarse_len
    g = np.empty_like(resid)
    g[0::2] = gc
    g[1::2] = (1.0 - w) * gc + w * np.roll(gc, -1)
    return g


def recover_inner_flux(
    mesh: TriMesh,
    geom: SpaceForm,
    solution: np.ndarray,
    load: np.ndarray,
    stiffness: sp.spmatrix | None = None,
    trace: str = "coarse",
) -> BoundaryFlux:
    """Consistent (residual-based) normal-derivative recovery on the inner loop.

    The residual ``r = K u - F`` at inner nodes equals ``int g phi_i dl``
    for the Euclidean outward normal derivative ``g``; solving the loop
    mass system recovers ``g``.  ``load`` must be the full, un-reduced
    right-hand side the solution was computed with.

    With ``trace="fine"`` the trace space is the P1 space of the loop
    itself.  On the alternating-diagonal meshes this leaves an O(h)
    period-2 oscillation between neighbouring nodes, so the default
    ``"coarse"`` tests against hats on every other loop node (sums of fine
    hats, so still exactly consistent) and interpolates linearly.
    """
    K = assemble_stiffness(mesh) if stiffness is None else stiffness
    loop = mesh.inner_boundary
    resid = (K @ solution - load)[loop]
    p = mesh.nodes[loop]
    lengths = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    if trace == "coarse" and loop.size % 2 == 0 and loop.size >= 6:
        g = _coarse_trace_flux(resid, lengths)
    elif trace in ("coarse", "fine"):
        g = spla.spsolve(boundary_mass(lengths), resid)
    else:
        raise ValueError(f"trace must be 'coarse' or 'fine', got {trace!r}")
    lam = conformal_factor(geom, p)
    return BoundaryFlux(mesh, np.array(loop), np.asarray(g), lam)
