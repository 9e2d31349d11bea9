"""Mesh-convergence study of the concentric annulus against the radial oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import AnnulusSpec, SpaceForm, geodesic_distance, geodesic_radius, model_radius
from .oracle import radial_J, radial_lambda1, radial_torsion
from .problems import Discretization, solve_eigen, solve_torsion

CONVERGENCE_COLUMNS = ("L", "h", "J", "err_J", "lambda1", "err_lambda1", "err_u_probe", "err_u_max", "err_flux")


@dataclass
class ConvergenceRow:
    L: int
    h: float
    J: float
    err_J: float
    lambda1: float
    err_lambda1: float
    err_u_probe: float
    err_u_max: float
    err_flux: float

    def csv_values(self) -> list:
        return [getattr(self, c) for c in CONVERGENCE_COLUMNS]


@dataclass
class ConvergenceStudy:
    geom: SpaceForm
    r0: float
    r1: float
    probe_radius: float
    rows: list[ConvergenceRow]

    def order(self, column: str) -> float:
        return fitted_order([r.h for r in self.rows], [getattr(r, column) for r in self.rows])

    def orders(self) -> dict[str, float]:
        return {c: self.order(c) for c in CONVERGENCE_COLUMNS if c.startswith("err_")}


def fitted_order(h, err) -> float:
    """Least-squares slope of ``log err`` against ``log h``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    if h.size < 2 or np.any(err <= 0):
        return math.nan
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def probe_radius(geom: SpaceForm, r0: float, r1: float) -> float:
    """Geodesic radius of the middle grid ring, a node ring at every level."""
    m = math.sqrt(float(model_radius(geom, r0)) * float(model_radius(geom, r1)))
    return float(geodesic_radius(geom, m))


def convergence_study(geom: SpaceForm, r0: float, r1: float, levels=range(2, 6)) -> ConvergenceStudy:
    spec = AnnulusSpec(geom, r0, r1, 0.0)
    rad = radial_torsion(geom, r0, r1)
    J_ref = radial_J(geom, r0, r1)
    lam_ref = radial_lambda1(geom, r0, r1)
    u_max = rad.max_value()
    flux_ref = -float(rad.du(r0))
    r_probe = probe_radius(geom, r0, r1)
    rows = []
    for L in levels:
        d = Discretization.build(spec, L)
        tor = solve_torsion(spec, L, d)
        eig = solve_eigen(spec, L, d, start=tor.y)
        mesh = d.mesh
        r = geodesic_distance(geom, np.zeros(2), mesh.nodes)
        err_nodes = np.abs(tor.y - rad.u(r))
        n_r = mesh.n_nodes // mesh.inner_boundary.size - 1
        ring = (n_r // 2) * mesh.inner_boundary.size + np.arange(mesh.inner_boundary.size)
        err_probe = abs(float(np.mean(tor.y[ring])) - float(rad.u(r_probe))) / u_max
        err_flux = float(np.max(np.abs(tor.inner_flux.metric - flux_ref))) / abs(flux_ref)
        rows.append(
            ConvergenceRow(
                L, mesh.max_edge_length(), tor.J, abs(tor.J - J_ref) / J_ref,
                eig.lambda1, abs(eig.lambda1 - lam_ref) / lam_ref,
                err_probe, float(err_nodes.max()) / u_max, err_flux,
            )
        )
    return ConvergenceStudy(geom, r0, r1, r_probe, rows)
