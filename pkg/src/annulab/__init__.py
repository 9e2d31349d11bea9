"""Torsional rigidity and first Dirichlet eigenvalue of annuli in space forms.

The inner ball is slid along an axis inside a fixed outer ball; the package
solves both problems by P1 finite elements in a conformal chart, evaluates
boundary-integral shape derivatives, and checks them against radial
reference solutions and finite differences.
"""
from .errors import (
    AnnulabError,
    AssemblyError,
    DegenerateConfigurationError,
    DomainError,
    GeometryError,
    InvalidPointError,
    OracleError,
    SolverError,
)
from .geometry import AnnulusSpec, SpaceForm, cos_beta, mobius_concentricize, vn_ambient
from .mesh import TriMesh, build_annulus_mesh, validate_mesh
from .oracle import radial_J, radial_lambda1, radial_torsion
from .problems import Discretization, solve_eigen, solve_shape_bvp, solve_torsion
from .shape import SweepRow, dJ_boundary, dLambda_boundary, reflection_report, sweep, sweep_row

__version__ = "0.1.0"

__all__ = [
    "AnnulabError", "AssemblyError", "DegenerateConfigurationError", "DomainError", "GeometryError",
    "InvalidPointError", "OracleError", "SolverError",
    "AnnulusSpec", "SpaceForm", "cos_beta", "mobius_concentricize", "vn_ambient",
    "TriMesh", "build_annulus_mesh", "validate_mesh",
    "radial_J", "radial_lambda1", "radial_torsion",
    "Discretization", "solve_eigen", "solve_shape_bvp", "solve_torsion",
    "SweepRow", "dJ_boundary", "dLambda_boundary", "reflection_report", "sweep", "sweep_row",
]
