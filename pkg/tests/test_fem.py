import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.spatial import Delaunay

from annulab import fem
from annulab.errors import SolverError
from annulab.geometry import AnnulusSpec, SpaceForm
from annulab.mesh import TriMesh, build_annulus_mesh
from annulab.oracle import radial_torsion
from annulab.problems import Discretization, solve_torsion

from conftest import solved

SPH, EUC, HYP = SpaceForm.SPHERICAL, SpaceForm.EUCLIDEAN, SpaceForm.HYPERBOLIC


def mesh_of(geom, t=0.0, L=2, r0=0.3, r1=1.0):
    return build_annulus_mesh(AnnulusSpec(geom, r0, r1, t), L)


def test_unit_right_triangle_stiffness():
    m = TriMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]), np.array([0]), np.array([1]))
    K = fem.assemble_stiffness(m).toarray()
    np.testing.assert_allclose(K, 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]]), atol=1e-15)


def test_stiffness_annihilates_constants(geom):
    K = fem.assemble_stiffness(mesh_of(geom, 0.35))
    assert np.max(np.abs(K @ np.ones(K.shape[0]))) < 1e-12
    assert abs(K - K.T).max() == 0.0


def test_capacity_energy_converges():
    r0, r1 = 0.3, 1.0
    exact = 2 * math.pi / math.log(r1 / r0)
    errs = []
    for L in (1, 2, 3):
        m = mesh_of(EUC, 0.0, L, r0, r1)
        u = np.log(np.hypot(*m.nodes.T) / r0) / math.log(r1 / r0)
        errs.append(abs(u @ (fem.assemble_stiffness(m) @ u) - exact) / exact)
    assert errs[-1] < 1e-3
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.4) & (ratios < 4.6)), ratios


def test_euclidean_mass_total_is_polygon_area():
    m = mesh_of(EUC, 0.2, 2)
    total = fem.assemble_weighted_mass(m, EUC).sum()
    poly = m.signed_areas().sum()
    assert total == pytest.approx(poly, abs=1e-10)
    assert total == pytest.approx(math.pi * (1.0 - 0.09), rel=1e-3)


@pytest.mark.parametrize(
    "geom, exact",
    [
        (EUC, math.pi * (1.0 - 0.09)),
        (SPH, 2 * math.pi * (math.cos(0.3) - math.cos(1.0))),
        (HYP, 2 * math.pi * (math.cosh(1.0) - math.cosh(0.3))),
    ],
)
def test_mass_total_converges_to_area(geom, exact):
    errs = [abs(fem.assemble_weighted_mass(mesh_of(geom, 0.0, L), geom).sum() - exact) / exact for L in (1, 2, 3)]
    assert errs[-1] < 1e-3
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.4) & (ratios < 4.6)), ratios


def test_mass_is_spd():
    M = fem.assemble_weighted_mass(mesh_of(HYP, 0.3, 0), HYP).toarray()
    np.testing.assert_array_equal(M, M.T)
    assert np.linalg.eigvalsh(M).min() > 0


def test_load_examples(geom):
    m = mesh_of(geom, 0.35, 1)
    M = fem.assemble_weighted_mass(m, geom)
    np.testing.assert_allclose(fem.assemble_load(m, geom, -1.0), np.asarray(M.sum(axis=1)).ravel(), rtol=1e-13, atol=1e-17)
    np.testing.assert_array_equal(fem.assemble_load(m, geom, 0.0), 0.0)


def test_load_is_local():
    m = mesh_of(EUC, 0.0, 1)
    c, w = np.array([0.6, 0.0]), 0.1

    def bump(x):
        r2 = np.sum((x - c) ** 2, axis=-1) / w**2
        return np.where(r2 < 1, np.exp(-1.0 / np.maximum(1 - r2, 1e-300)), 0.0)

    F = fem.assemble_load(m, EUC, bump)
    touched = np.any(bump(fem.midpoints(m)) != 0, axis=1)
    near = np.zeros(m.n_nodes, dtype=bool)
    near[np.unique(m.triangles[touched])] = True
    assert np.all(F[~near] == 0.0)
    assert np.any(F[near] != 0.0)


def test_apply_dirichlet_counts_and_embed():
    m = mesh_of(SPH, 0.35, 1)
    ds = fem.apply_dirichlet(fem.assemble_stiffness(m), m.boundary_nodes)
    assert ds.matrix.shape[0] == m.n_nodes - m.boundary_nodes.size
    u = ds.embed(np.ones(ds.matrix.shape[0]))
    assert np.all(u[m.boundary_nodes] == 0.0)


def test_solve_spd_examples():
    b = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(fem.solve_spd(sp.identity(3), b), b)
    x = fem.solve_spd(sp.csr_matrix([[2.0, 1.0], [1.0, 2.0]]), np.array([1.0, 1.0]))
    np.testing.assert_allclose(x, [1 / 3, 1 / 3], rtol=1e-15)


def test_solve_spd_random():
    rng = np.random.default_rng(11)
    B = rng.normal(size=(50, 50))
    A = B.T @ B + np.eye(50)
    b = rng.normal(size=50)
    x = fem.solve_spd(sp.csr_matrix(A), b)
    assert np.linalg.norm(A @ x - b) <= 1e-12 * np.linalg.norm(b)


def test_solver_rejects_bad_matrices():
    with pytest.raises(SolverError):
        fem.SpdFactor(sp.csr_matrix([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(SolverError):
        fem.SpdFactor(sp.csr_matrix([[1.0, 0.0], [0.0, -1.0]]))


def test_smallest_eigenpair_examples():
    lam, u = fem.smallest_eigenpair(sp.diags([1.0, 2.0, 3.0]), sp.identity(3))
    assert lam == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(u, [1.0, 0.0, 0.0], atol=1e-6)
    rng = np.random.default_rng(3)
    B = rng.normal(size=(20, 20))
    A = sp.csr_matrix(B.T @ B + np.eye(20))
    lam, _ = fem.smallest_eigenpair(A, A)
    assert lam == pytest.approx(1.0, rel=1e-12)


def _disk_mesh(rings):
    pts = [np.zeros((1, 2))]
    for k in range(1, rings + 1):
        th = 2 * np.pi * np.arange(6 * k) / (6 * k)
        pts.append(k / rings * np.column_stack([np.cos(th), np.sin(th)]))
    nodes = np.vstack(pts)
    tris = Delaunay(nodes).simplices.astype(np.int64)
    p = nodes[tris]
    area = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    tris[area < 0] = tris[area < 0][:, [0, 2, 1]]
    ring = np.arange(nodes.shape[0] - 6 * rings, nodes.shape[0])
    return TriMesh(nodes, tris, np.array([0]), ring)


def test_unit_disk_harness_approaches_bessel_zero():
    target = 2.404825557695773**2
    errs = []
    for rings in (8, 16, 32):
        m = _disk_mesh(rings)
        K = fem.assemble_stiffness(m)
        M = fem.assemble_weighted_mass(m, EUC)
        ds = fem.apply_dirichlet(K, m.outer_boundary)
        M_I = fem.apply_dirichlet(M, m.outer_boundary).matrix
        lam, _ = fem.smallest_eigenpair(ds.matrix, M_I)
        errs.append(abs(lam - target) / target)
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] < 2e-3


def test_energy_and_rayleigh_identities(geom):
    d, tor, eig = solved(geom, 0.3, 1.0, 0.35, 2)
    assert abs(tor.energy - tor.y @ d.unit_load) <= 1e-12 * tor.J
    assert abs(tor.J - tor.energy) <= 1e-9 * tor.J
    assert eig.y1 @ (d.mass @ eig.y1) == pytest.approx(1.0, abs=1e-12)
    assert abs(eig.lambda1 - eig.y1 @ (d.stiffness @ eig.y1)) <= 1e-10 * eig.lambda1


def test_euclidean_flux_matches_radial_derivative():
    rad = radial_torsion(EUC, 0.5, 1.0)
    ref = -float(rad.du(0.5))  # outward from the annulus = towards the centre
    errs = []
    for L in (1, 2, 3):
        _, tor, _ = solved(EUC, 0.5, 1.0, 0.0, L)
        errs.append(np.max(np.abs(tor.inner_flux.metric - ref)) / abs(ref))
    assert errs[-1] < 1e-4
    assert errs[0] / errs[1] > 3.4 and errs[1] / errs[2] > 3.4


def test_coarse_trace_beats_fine_trace():
    spec = AnnulusSpec(EUC, 0.5, 1.0, 0.0)
    d = Discretization.build(spec, 2)
    tor = solve_torsion(spec, 2, d)
    ref = -float(radial_torsion(EUC, 0.5, 1.0).du(0.5))
    fine = fem.recover_inner_flux(d.mesh, EUC, tor.y, d.unit_load, d.stiffness, trace="fine")
    coarse = fem.recover_inner_flux(d.mesh, EUC, tor.y, d.unit_load, d.stiffness, trace="coarse")
    e_fine = np.max(np.abs(fine.metric - ref))
    e_coarse = np.max(np.abs(coarse.metric - ref))
    assert e_coarse < 0.1 * e_fine
    # both recoveries are consistent: their weighted integrals agree
    ell = coarse.edge_lengths()
    M = fem.boundary_mass(ell)
    assert np.sum(M @ coarse.euclidean) == pytest.approx(np.sum(M @ fine.euclidean), rel=1e-10)
    with pytest.raises(ValueError):
        fem.recover_inner_flux(d.mesh, EUC, tor.y, d.unit_load, trace="raw")


@pytest.mark.parametrize("t", [0.0, 0.35, 0.6])
def test_fluxes_strictly_negative(geom, t):
    _, tor, eig = solved(geom, 0.3, 1.0, t, 2)
    assert np.all(tor.inner_flux.metric < 0)
    assert np.all(eig.inner_flux.metric < 0)


def test_assembly_bitwise_deterministic():
    m = mesh_of(SPH, 0.35, 1)
    for fn in (lambda: fem.assemble_stiffness(m), lambda: fem.assemble_weighted_mass(m, SPH)):
        a, b = fn(), fn()
        assert a.data.tobytes() == b.data.tobytes()
        assert a.indices.tobytes() == b.indices.tobytes()


def test_eigen_solution_is_positive_and_normalised():
    d, _, eig = solved(HYP, 0.3, 1.0, 0.35, 2)
    assert np.all(d.dirichlet.restrict(eig.y1) > 0)
    assert eig.lambda1 > 0
