import math
import warnings

import numpy as np
import pytest
from scipy import integrate

from coldplasma.constants import CGS, ERG_PER_MEV
from coldplasma.correction import (
    FirstCorrection,
    PlasmaSetup,
    beta_z1_closed,
    corrected_state,
    corrected_vector_potential,
    longitudinal_field,
    r0,
    slingshot,
    validity,
)
from coldplasma.kinematics import ELECTRON
from coldplasma.phase_functions import build

from conftest import FLAME_XI0, LAM, make_pulse

N0 = 1e18


@pytest.fixture(scope="module")
def circ_w1():
    p = make_pulse("constant", "circular", w=1.0)
    return p, build(ELECTRON, p)


def test_K_definition():
    assert PlasmaSetup(N0).K == pytest.approx(math.pi * CGS.r_e * N0, rel=1e-15)
    assert PlasmaSetup(N0).K == pytest.approx(8.8528e5, rel=1e-4)
    for bad in (-1.0, math.nan, math.inf):
        with pytest.raises(ValueError):
            PlasmaSetup(bad)


def test_longitudinal_field_examples():
    s = PlasmaSetup(N0)
    unit = 4 * math.pi * CGS.e * N0
    assert longitudinal_field(s, 0.0, LAM, LAM) == 0.0
    assert longitudinal_field(s, 0.0, 3 * LAM, LAM) == pytest.approx(unit * 2 * LAM, rel=1e-15)
    # ahead of the plasma edge only the part of the column at z > 0 counts
    assert longitudinal_field(s, 0.0, LAM, -LAM) == pytest.approx(unit * LAM, rel=1e-15)
    assert longitudinal_field(s, 0.0, -2 * LAM, -LAM) == 0.0


def test_neutrality_and_tabulated_profile():
    s = PlasmaSetup(N0, profile=([0.0, LAM, 2 * LAM], [0.0, N0, N0]))
    Z = np.array([-LAM, 0.5 * LAM, LAM, 3 * LAM])
    np.testing.assert_allclose(s.cumulative(Z), [0.0, N0 * LAM / 8, N0 * LAM / 2, 1.5 * N0 * LAM], rtol=1e-14)
    np.testing.assert_array_equal(s.neutrality_residual(Z), 0.0)
    with pytest.raises(ValueError):
        PlasmaSetup(N0, profile=([0.0, 0.0], [1.0, 1.0]))


def test_r0_closed_form_circular_constant(circ_w1):
    _, pf = circ_w1
    s = PlasmaSetup(N0)
    K, k = s.K, 2 * math.pi / LAM
    Z = 0.25 * LAM
    for n in (1, 2):
        # Xi(n lambda) = 2 n lambda, and V3 = xi^2/2 + (cos k xi - 1)/k^2 = (n lambda)^2 / 2 there
        got = r0(pf, s, Z + 2 * n * LAM, Z, check=True)
        assert got == pytest.approx(4 * K * (n * LAM) ** 2 / 2, rel=1e-12)
    xi = 1.3 * LAM
    exact = 4 * K * (xi**2 / 2 + (math.cos(k * xi) - 1) / k**2)
    assert r0(pf, s, Z + pf.Xi(xi), Z) == pytest.approx(exact, rel=1e-11)


def test_r0_two_routes(gauss_circ, rng):
    _, pf = gauss_circ
    s = PlasmaSetup(N0)
    Z = rng.uniform(0, 5 * LAM, 20)
    x0 = Z + rng.uniform(0, 40 * LAM, 20)
    r0(pf, s, x0, Z, check=True, rtol=1e-8)
    with pytest.raises(ValueError):
        r0(pf, s, LAM, -LAM)


def test_zero_density_limit(gauss_circ):
    _, pf = gauss_circ
    s = PlasmaSetup(0.0)
    xi = np.linspace(0, 20 * LAM, 50)
    st = corrected_state(pf, s, xi)
    np.testing.assert_array_equal(st.s1, 1.0)
    # the s-form subtracts 1 from 1 + u_perp^2, so only absolute agreement holds
    np.testing.assert_allclose(st.state.u_z, pf.u_z(xi), rtol=1e-14, atol=4e-16 * (1 + np.max(pf.u_z(xi))))
    fc = FirstCorrection(pf, s)
    np.testing.assert_array_equal(fc.T(xi), 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rep = slingshot(pf, s, 10 * LAM)
    assert rep.gamma_M == 1.0
    assert rep.H_MeV == pytest.approx(0.51099895, rel=1e-8)


def test_corrected_electron_moves_backward_at_rest_points():
    p = make_pulse("constant", "linear", w=1.0)
    pf = build(ELECTRON, p)
    s = PlasmaSetup(N0)
    xi = np.array([LAM, 2 * LAM, 3 * LAM])
    st = corrected_state(pf, s, xi)
    assert np.all(st.r0 > 0)
    assert np.all(st.beta_z1 < 0)
    assert np.all(beta_z1_closed(0.0, np.array([1e-6, 0.1, 2.0])) < 0)


def test_beta_z1_closed_form_matches_state(gauss_circ, rng):
    _, pf = gauss_circ
    s = PlasmaSetup(1e20)
    xi = rng.uniform(0, 20 * LAM, 300)
    st = corrected_state(pf, s, xi)
    u2 = np.sum(pf.u_perp(xi) ** 2, axis=-1)
    np.testing.assert_allclose(st.beta_z1, beta_z1_closed(u2, st.r0), rtol=0, atol=1e-12)


def test_g_identity_and_G_table(gauss_circ):
    _, pf = gauss_circ
    fc = FirstCorrection(pf, PlasmaSetup(1e20), xi_max=25 * LAM)
    xi = np.linspace(0.1 * LAM, 25 * LAM, 200)
    st = corrected_state(pf, fc.setup, xi)
    via_velocity = pf.gamma(xi) * (pf.u_z(xi) / pf.gamma(xi) - st.beta_z1)
    g = fc.g(xi)
    np.testing.assert_allclose(g, via_velocity, rtol=1e-9, atol=1e-12 * np.max(np.abs(g)))
    for x in (3 * LAM, 11 * LAM, 25 * LAM):
        edges = np.concatenate([pf.breaks[pf.breaks < x], [x]])
        ref = sum(integrate.quad(fc.g, a, b, epsabs=0, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:]))
        assert fc.G(x) == pytest.approx(ref, rel=1e-9)
    # displacement lost to the plasma field
    np.testing.assert_allclose(pf.Y3(xi) - fc.dz1_phase(xi), fc.G(xi), rtol=1e-9,
                               atol=1e-12 * np.max(fc.G(xi)))
    with pytest.raises(ValueError):
        fc.G(2 * fc.xi_max)


def test_G_scales_with_K_for_small_r0(gauss_circ):
    _, pf = gauss_circ
    xi = 16 * LAM
    G = [float(FirstCorrection(pf, PlasmaSetup(n), xi_max=xi).G(xi)) for n in (N0, N0 / 2)]
    assert G[0] / G[1] == pytest.approx(2.0, rel=0.2)


def test_validity_and_slingshot(flame):
    p, pf = flame
    s = PlasmaSetup(N0)
    rep = slingshot(pf, s, FLAME_XI0)
    assert rep.passed
    assert rep.gamma_M == pytest.approx(1 + 2 * rep.K * rep.zeta**2, rel=1e-15)
    assert rep.H_MeV == pytest.approx(CGS.electron_rest_energy * rep.gamma_M / ERG_PER_MEV, rel=1e-15)
    assert 0.5 < rep.K * FLAME_XI0**2 < 2
    ratio = (2 * pf.Y3(FLAME_XI0) + FLAME_XI0) * rep.K * LAM / (2 * math.pi)
    assert rep.validity.cond2_ratio == pytest.approx(ratio, rel=1e-12)
    assert "PASS" in rep.summary()
    strict = validity(pf, s, 0.0, FLAME_XI0, threshold=0.03)
    assert not strict.passed
    geo = slingshot(pf, s, FLAME_XI0, R=1e-3, l=1e-5)
    assert geo.geometry == {"R_ge_2zeta": False, "l_ll_R": True} and not geo.passed


def test_vector_potential_zero_density(gauss_circ):
    _, pf = gauss_circ
    res = corrected_vector_potential(pf, PlasmaSetup(0.0), np.array([5 * LAM, 10 * LAM]), np.array([LAM, 0.0]))
    np.testing.assert_array_equal(res.delta_u, 0.0)
    np.testing.assert_array_equal(res.u1, res.u0)
    np.testing.assert_allclose(res.A1, -res.u0 / ELECTRON.coupling)


def test_vector_potential_routes_agree(gauss_circ):
    _, pf = gauss_circ
    res = corrected_vector_potential(pf, PlasmaSetup(N0), np.array([8 * LAM, 14 * LAM]),
                                     np.array([2 * LAM, 0.5 * LAM]))
    assert np.max(np.abs(res.delta_u)) > 0
    assert res.route_difference <= 1e-9 * np.max(np.abs(res.delta_u_1d))
    with pytest.raises(ValueError):
        corrected_vector_potential(pf, PlasmaSetup(N0), -LAM, 0.0)
