import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coldplasma.constants import CGS
from coldplasma.kinematics import ELECTRON, POSITRON, PROTON, Species, state_from_s, state_from_u, transverse_momentum


def test_species_signs_and_masses():
    assert ELECTRON.charge < 0 < POSITRON.charge
    assert ELECTRON.charge == -CGS.e and CGS.e > 0
    assert PROTON.mass > ELECTRON.mass > 0


def test_species_rejects_bad_parameters():
    with pytest.raises(ValueError):
        Species(-1.0, 1.0, "bad")
    with pytest.raises(ValueError):
        Species(1.0, 0.0, "bad")


def test_classical_radius_identity():
    assert CGS.r_e == pytest.approx(CGS.e**2 / (CGS.m_e * CGS.c**2), rel=1e-12)
    assert CGS.r_e == pytest.approx(2.8179403262e-13, rel=1e-9)


def test_rest_state():
    s = state_from_s(np.zeros(2), 1.0)
    assert s.gamma == 1.0 and s.u_z == 0.0
    np.testing.assert_array_equal(s.beta, np.zeros(3))


def test_unit_transverse_momentum():
    s = state_from_s(np.array([1.0, 0.0]), 1.0)
    assert s.gamma == pytest.approx(1.5, abs=1e-15)
    assert s.u_z == pytest.approx(0.5, abs=1e-15)
    assert s.beta_z == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_s_one_reproduces_zero_density_form(rng):
    u = rng.normal(scale=3.0, size=(100, 2))
    s = state_from_s(u, np.ones(100))
    u2 = np.sum(u**2, axis=1)
    np.testing.assert_allclose(s.gamma, 1 + u2 / 2, rtol=1e-14)
    np.testing.assert_allclose(s.u_z, u2 / 2, rtol=1e-14)


def test_nonpositive_s_rejected():
    with pytest.raises(ValueError):
        state_from_s(np.zeros(2), 0.0)
    with pytest.raises(ValueError):
        state_from_s(np.zeros((2, 2)), np.array([1.0, -1.0]))


def test_transverse_momentum_examples():
    np.testing.assert_array_equal(transverse_momentum(ELECTRON, np.zeros(2)), np.zeros(2))
    a = np.array([CGS.m_e * CGS.c**2 / CGS.e, 0.0])
    np.testing.assert_allclose(transverse_momentum(ELECTRON, a), [1.0, 0.0], rtol=1e-15)
    ue = transverse_momentum(ELECTRON, a)
    up = transverse_momentum(PROTON, a)
    assert np.sign(ue[0]) == -np.sign(up[0])
    assert abs(up[0] / ue[0]) == pytest.approx(CGS.m_e / CGS.m_p, rel=1e-14)


def test_random_states_invariants(rng):
    n = 10_000
    s = np.exp(rng.uniform(np.log(0.01), np.log(100.0), n))
    mag = rng.uniform(0.0, 100.0, n)
    phi = rng.uniform(0, 2 * np.pi, n)
    u = np.column_stack([mag * np.cos(phi), mag * np.sin(phi)])
    st_ = state_from_s(u, s)
    assert np.max(np.abs(st_.mass_shell_residual())) < 1e-10
    assert np.all(st_.s > 0)
    assert np.all(np.linalg.norm(st_.beta, axis=1) < 1)
    # the recovery formula for beta_z against u_z / gamma
    beta_z_formula = (1 + mag**2 - s**2) / (1 + mag**2 + s**2)
    np.testing.assert_allclose(beta_z_formula, st_.u_z / st_.gamma, rtol=1e-12, atol=1e-15)
    back = state_from_u(st_.u_perp, st_.u_z)
    np.testing.assert_allclose(back.s, s, rtol=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    ux=st.floats(-100, 100),
    uy=st.floats(-100, 100),
    log_s=st.floats(np.log(0.01), np.log(100.0)),
)
def test_roundtrip_property(ux, uy, log_s):
    s = np.exp(log_s)
    state = state_from_s(np.array([ux, uy]), s)
    assert state.gamma == pytest.approx(np.sqrt(1 + ux**2 + uy**2 + state.u_z**2), rel=1e-12)
    assert state_from_u(state.u_perp, state.u_z).s == pytest.approx(s, rel=1e-12)
