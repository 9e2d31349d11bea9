import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.optimize import brentq
from scipy.special import j0, y0

from annulab import oracle
from annulab.errors import GeometryError
from annulab.geometry import SpaceForm

SPH, EUC, HYP = SpaceForm.SPHERICAL, SpaceForm.EUCLIDEAN, SpaceForm.HYPERBOLIC

# Frozen from a 30-digit mpmath solve of the two boundary conditions.
SPH_C = -0.8143315302527122
SPH_D = -0.3197268020984523
SPH_U06 = 0.0641873480535427
EUC_C = 0.27050532016668064
EUC_J = 0.04947381662032933  # 2 pi int u r dr, mpmath quadrature

# Shooting values, each confirmed by the independent 1-D FEM to ~1e-8.
LAMBDA1 = {
    (SPH, 0.3, 1.0): 19.12798341841455,
    (EUC, 0.3, 1.0): 19.469226931235372,
    (HYP, 0.3, 1.0): 19.79581264156614,
    (EUC, 0.5, 1.0): 39.01328850139592,
}
RADIAL_J = {
    (SPH, 0.3, 1.0): 0.11206411500402597,
    (EUC, 0.3, 1.0): 0.11941734278305155,
    (HYP, 0.3, 1.0): 0.12710811187439913,
}


def test_spherical_constants():
    rt = oracle.radial_torsion(SPH, 0.3, 1.0)
    assert rt.C == pytest.approx(SPH_C, abs=1e-13)
    assert rt.D == pytest.approx(SPH_D, abs=1e-13)
    assert float(rt.u(0.6)) == pytest.approx(SPH_U06, abs=1e-13)
    assert abs(float(rt.u(0.3))) < 1e-14 and abs(float(rt.u(1.0))) < 1e-14


def test_euclidean_constant():
    rt = oracle.radial_torsion(EUC, 0.5, 1.0)
    assert rt.C == pytest.approx(EUC_C, rel=1e-14)
    assert rt.C == pytest.approx(-(1 - 0.25) / (4 * math.log(0.5)), rel=1e-14)
    assert float(rt.u(0.75)) == pytest.approx((1 - 0.75**2) / 4 + EUC_C * math.log(0.75), rel=1e-14)


@pytest.mark.parametrize("r0, r1", [(0.3, 1.0), (0.5, 1.0), (0.1, 2.0)])
def test_closed_form_properties(geom, r0, r1):
    if geom is SPH and r1 >= math.pi:
        pytest.skip("outside the spherical range")
    rt = oracle.radial_torsion(geom, r0, r1)
    assert rt.du(r0) > 0 > rt.du(r1)
    r = np.linspace(r0, r1, 101)
    assert np.max(np.abs(rt.laplacian(r) + 1.0)) < 1e-10
    assert np.all(rt.u(r[1:-1]) > 0)


@pytest.mark.parametrize("key", list(RADIAL_J))
def test_radial_J_frozen(key):
    val = oracle.radial_J(*key)
    assert val > 0
    assert val == pytest.approx(RADIAL_J[key], rel=1e-12)


def test_radial_J_euclidean_two_quadratures():
    rt = oracle.radial_torsion(EUC, 0.5, 1.0)
    r = np.linspace(0.5, 1.0, 1_000_001)
    trap = 2 * math.pi * trapezoid(rt.u(r) * r, r)
    quad = oracle.radial_J(EUC, 0.5, 1.0)
    assert quad == pytest.approx(EUC_J, rel=1e-13)
    assert trap == pytest.approx(quad, rel=1e-10)


@pytest.mark.parametrize("key", list(LAMBDA1))
def test_radial_lambda1_frozen(key):
    assert oracle.radial_lambda1(*key) == pytest.approx(LAMBDA1[key], rel=1e-9)


def test_shooting_and_fem_agree(geom):
    a = oracle.radial_lambda1_shooting(geom, 0.3, 1.0)
    b = oracle.radial_lambda1_fem(geom, 0.3, 1.0)
    assert abs(a - b) / a < oracle.DUAL_METHOD_RTOL


def test_euclidean_against_bessel_cross_product():
    # first zero of J0(k r0) Y0(k r1) - J0(k r1) Y0(k r0)
    r0, r1 = 0.5, 1.0
    f = lambda k: j0(k * r0) * y0(k * r1) - j0(k * r1) * y0(k * r0)
    k = brentq(f, 5.0, 7.0, xtol=1e-15)
    assert oracle.radial_lambda1(EUC, r0, r1) == pytest.approx(k * k, rel=1e-8)


def test_narrow_annulus_string_limit():
    lam = oracle.radial_lambda1(EUC, 0.5, 0.55)
    assert 0.95 <= lam / (math.pi / 0.05) ** 2 <= 1.05


@pytest.mark.parametrize("alpha", [0.5, 2.0, 3.7])
def test_euclidean_dilation(alpha):
    base = oracle.radial_lambda1_shooting(EUC, 0.3, 1.0, rtol=1e-12)
    scaled = oracle.radial_lambda1_shooting(EUC, 0.3 * alpha, alpha, rtol=1e-12)
    assert scaled == pytest.approx(base / alpha**2, rel=1e-8)


def test_bad_radii():
    with pytest.raises(GeometryError):
        oracle.radial_torsion(EUC, 1.0, 0.5)
    with pytest.raises(GeometryError):
        oracle.radial_lambda1(SPH, 0.3, 3.5)
