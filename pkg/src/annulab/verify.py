"""Invariant suite behind ``annulab verify``.

Each check yields a :class:`CheckResult`; the suite passes iff all do.
Module-level functions of :mod:`annulab.geometry` and :mod:`annulab.fem`
are looked up at call time, so monkeypatched mutations are exercised.
"""
from __future__ import annotations

import itertools
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import geometry, params
from .convergence import convergence_study
from .geometry import AnnulusSpec, SpaceForm, geodesic_ball_to_disk
from .mesh import build_annulus_mesh, validate_mesh
from .problems import Discretization, solve_eigen, solve_torsion
from .shape import _functionals, sweep, sweep_row

GROUPS = ("geometry", "oracle", "sweeps")


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    threshold: str
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name:<44} measured={self.measured:<12.4g} threshold {self.threshold}{extra}"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else math.inf


# --------------------------------------------------------------------------
# geometry


def geometry_checks(geoms) -> list[CheckResult]:
    out = []
    rng = np.random.default_rng(20240601)
    for g in geoms:
        r0, r1 = params.CANONICAL_RADII[g]
        worst = 0.0
        sym_worst = 0.0
        sign_ok = True
        for t0 in params.IDENTITY_OFFSETS:
            pts = geodesic_ball_to_disk(g, t0, r0).points(rng.uniform(0, 2 * np.pi, params.IDENTITY_SAMPLES))
            cb = geometry.cos_beta(g, t0, r0, pts)
            vn = geometry.vn_ambient(g, t0, r0, pts)
            worst = max(worst, float(np.max(np.abs(cb - vn))))
            side = pts[geometry.half_domain_criterion(g, t0, pts) > 1e-8]
            cb_side = geometry.cos_beta(g, t0, r0, side)
            cb_refl = geometry.cos_beta(g, t0, r0, geometry.reflect(g, t0, side))
            sign_ok &= bool(np.all(cb_side < 0))
            sym_worst = max(sym_worst, float(np.max(np.abs(cb_refl + cb_side))))
        out.append(CheckResult(f"cos-beta-identity[{g.tag}]", worst < geometry.GEOM_TOL, worst, "< 1e-10"))
        out.append(
            CheckResult(
                f"cos-beta-mirror[{g.tag}]",
                sign_ok and sym_worst < geometry.GEOM_TOL,
                sym_worst,
                "< 1e-10 and cos beta < 0 on half-domain",
                "" if sign_ok else "cos beta >= 0 on half-domain side",
            )
        )
        bad = []
        for t in params.t_values(*params.T_GRID):
            rep = validate_mesh(build_annulus_mesh(AnnulusSpec(g, r0, r1, t), params.LEVEL))
            if not rep.ok:
                bad.append(f"t={t}: {rep.violations[0]}")
        out.append(CheckResult(f"mesh-valid[{g.tag}]", not bad, len(bad), "0 violating meshes", "; ".join(bad)))
    return out


# --------------------------------------------------------------------------
# concentric oracles


def oracle_checks(geoms) -> list[CheckResult]:
    out = []
    lo, hi = params.ORDER_RANGE
    rng_txt = f"in [{lo}, {hi}]"
    for g in geoms:
        r0, r1 = params.ORACLE_RADII[g]
        spec = AnnulusSpec(g, r0, r1, 0.0)
        tic = time.perf_counter()
        d = Discretization.build(spec, params.LEVEL)
        tor = solve_torsion(spec, params.LEVEL, d)
        t_tor = time.perf_counter() - tic
        tic = time.perf_counter()
        solve_eigen(spec, params.LEVEL, d, start=tor.y)
        t_eig = time.perf_counter() - tic
        out.append(
            CheckResult(f"solve-runtime[{g.tag}]", max(t_tor, t_eig) < params.SOLVE_SECONDS, max(t_tor, t_eig), "< 10 s")
        )

        st = convergence_study(g, r0, r1, params.CONVERGENCE_LEVELS)
        row = next(r for r in st.rows if r.L == params.LEVEL)
        orders = st.orders()
        out.append(
            CheckResult(f"torsion-oracle[{g.tag}]", row.err_u_max < params.ORACLE_TORSION_RTOL, row.err_u_max, "< 1e-3")
        )
        for col, label in (("err_u_max", "torsion-order"), ("err_J", "J-order"), ("err_lambda1", "lambda-order")):
            o = orders[col]
            out.append(CheckResult(f"{label}[{g.tag}]", lo <= o <= hi, o, rng_txt))
        out.append(
            CheckResult(f"lambda-oracle[{g.tag}]", row.err_lambda1 < params.ORACLE_LAMBDA_RTOL, row.err_lambda1, "< 5e-3")
        )
        out.append(
            CheckResult(f"flux-order[{g.tag}]", orders["err_flux"] >= params.FLUX_MIN_ORDER, orders["err_flux"], ">= 1.5")
        )
        errs = [r.err_J for r in st.rows]
        out.append(
            CheckResult(
                f"monotone-error[{g.tag}]", all(b < a for a, b in zip(errs, errs[1:])), len(errs), "errors decrease with L"
            )
        )
    return out


# --------------------------------------------------------------------------
# offset sweeps


def sweep_checks(geoms) -> list[CheckResult]:
    out = []
    L, delta = params.LEVEL, params.DELTA
    tol = params.DERIVATIVE_RTOL
    for g in geoms:
        r0, r1 = params.CANONICAL_RADII[g]
        rows = sweep(g, r0, r1, params.t_values(*params.T_GRID), L, delta)
        pos = [r for r in rows if r.t >= 0.1 - 1e-12]
        J = [r.J for r in rows]
        lam = [r.lambda1 for r in rows]
        dJ = np.diff(J)
        dl = np.diff(lam)
        out.append(CheckResult(f"J-increasing[{g.tag}]", bool(np.all(dJ > 0)), float(dJ.min()), "> 0"))
        out.append(CheckResult(f"lambda-decreasing[{g.tag}]", bool(np.all(dl < 0)), float(dl.max()), "< 0"))

        z = rows[0]
        stat = max(abs(z.dJ_bnd) / z.dJ_zero_tol, abs(z.dlam_bnd) / z.dlam_zero_tol)
        out.append(CheckResult(f"stationarity[{g.tag}]", stat < 1.0, stat, "< 1 (units of 1e-6 * int|integrand|)"))

        sign_ok = all(r.dJ_bnd > 0 and r.dlam_bnd < 0 for r in pos)
        out.append(
            CheckResult(f"sign-laws[{g.tag}]", sign_ok, min(min(r.dJ_bnd, -r.dlam_bnd) for r in pos), "dJ > 0, dlam < 0")
        )
        margin = min(min(r.min_torsion_margin, r.min_eigen_margin) for r in pos)
        strict = all(r.reflect_torsion and r.reflect_eigen for r in pos)
        out.append(CheckResult(f"reflection-inequality[{g.tag}]", strict, margin, "|flux(x)| < |flux(x')|"))

        hopf = max(max(r.torsion_flux_max, r.eigen_flux_max) for r in rows)
        out.append(CheckResult(f"hopf-sign[{g.tag}]", hopf < 0, hopf, "inner flux < 0"))
        mp = min(min(r.torsion_min_interior, r.eigen_min_interior) for r in rows)
        out.append(CheckResult(f"maximum-principle[{g.tag}]", mp > 0, mp, "interior values > 0"))
        en = max(r.energy_residual for r in rows)
        out.append(CheckResult(f"energy-identity[{g.tag}]", en <= params.ENERGY_RTOL, en, "<= 1e-9"))
        ry = max(r.rayleigh_residual for r in rows)
        out.append(CheckResult(f"rayleigh-identity[{g.tag}]", ry <= 1e-10, ry, "<= 1e-10"))

        green = max(_rel(r.dJ_vol, r.dJ_bnd) for r in pos)
        out.append(CheckResult(f"green-identity[{g.tag}]", green < params.GREEN_RTOL, green, "< 2%"))
        inner = [r for r in pos if r.t <= 0.5 + 1e-12]
        cross = max(max(_rel(r.dJ_bnd, r.dJ_fd), _rel(r.dlam_bnd, r.dlam_fd)) for r in inner)
        out.append(CheckResult(f"derivative-crosscheck-sweep[{g.tag}]", cross < tol, cross, "< 5% for 0.1 <= t <= 0.5"))
        gap = sweep_row(g, r0, r1, rows[-1].t, L + 1, delta)
        cross_gap = max(_rel(gap.dJ_bnd, gap.dJ_fd), _rel(gap.dlam_bnd, gap.dlam_fd))
        out.append(
            CheckResult(
                f"derivative-crosscheck-gap[{g.tag}]", cross_gap < tol, cross_gap, f"< 5% at t={rows[-1].t}, L={L + 1}"
            )
        )

        r = sweep_row(g, r0, r1, params.T_CHECK, L, delta)
        had = _rel(r.dlam_bnd, r.dlam_fd)
        out.append(
            CheckResult(f"hadamard-eigen[{g.tag}]", had < tol and r.dlam_bnd < 0, had, "< 5% and dlam_bnd < 0")
        )
        trio = (r.dJ_bnd, r.dJ_vol, r.dJ_fd)
        pair = max(_rel(a, b) for a, b in itertools.permutations(trio, 2))
        out.append(
            CheckResult(
                f"hadamard-torsion-triple[{g.tag}]", pair < tol and min(trio) > 0, pair, "pairwise < 5% and all > 0"
            )
        )
        Jm, lm = _functionals(AnnulusSpec(g, r0, r1, -params.T_CHECK), L)
        ev = max(_rel(Jm, r.J), _rel(lm, r.lambda1))
        out.append(CheckResult(f"evenness[{g.tag}]", ev < params.EVENNESS_RTOL, ev, "< 1e-10"))
    return out


_RUNNERS = {"geometry": geometry_checks, "oracle": oracle_checks, "sweeps": sweep_checks}


def run_verify(groups=None, geoms=None, stream=...) -> tuple[bool, list[CheckResult]]:
    """Run the check groups; ``stream=None`` silences the report."""
    if stream is ...:
        stream = sys.stdout
    groups = list(groups or GROUPS)
    geoms = list(geoms or SpaceForm)
    results = []
    for grp in groups:
        if grp not in _RUNNERS:
            raise ValueError(f"unknown check group {grp!r}")
        for res in _RUNNERS[grp](geoms):
            results.append(res)
            if stream is not None:
                print(res.line(), file=stream, flush=True)
    failed = [r for r in results if not r.passed]
    if stream is not None:
        print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=stream)
        for r in failed:
            print(f"failed: {r.name} measured {r.measured:.6g}, threshold {r.threshold}", file=stream)
    return not failed, results
