import math

import numpy as np
import pytest

from coldplasma.fields import PlaneWave, StepPlasmaField
from coldplasma.kinematics import ELECTRON
from coldplasma.oracle import OracleConfig, OracleError, convergence_order, integrate

from conftest import LAM, make_pulse

H = LAM / 200


def test_zero_field_straight_line():
    wave = PlaneWave(make_pulse("gaussian", "linear", w=0.0))
    beta = np.array([0.2, -0.3, 0.5])
    res = integrate(ELECTRON, wave, np.zeros(3), beta, (0.0, 10 * LAM), OracleConfig(H), sample_every=50)
    t = res.trajectory.x0
    np.testing.assert_allclose(res.trajectory.x, t[:, None] * beta, rtol=0, atol=1e-12 * 10 * LAM)
    g0 = 1 / math.sqrt(1 - beta @ beta)
    np.testing.assert_allclose(res.gamma_integrated, g0, rtol=1e-12)
    assert res.landings == 0


def test_sampling_grid():
    wave = PlaneWave(make_pulse("gaussian", "linear", w=0.0))
    res = integrate(ELECTRON, wave, np.zeros(3), np.zeros(3), (0.0, 1.013 * LAM), OracleConfig(H), sample_every=40)
    # the span is rounded up to whole steps and the end point is always kept
    np.testing.assert_allclose(res.trajectory.x0, [0, 40 * H, 80 * H, 120 * H, 160 * H, 200 * H, 203 * H])


def test_invalid_inputs():
    wave = PlaneWave(make_pulse("gaussian", "linear"))
    with pytest.raises(ValueError):
        integrate(ELECTRON, wave, np.zeros(3), np.zeros(3), (0, LAM), OracleConfig(LAM / 40))
    with pytest.raises(ValueError):
        integrate(ELECTRON, wave, np.zeros(3), [0.0, 0.0, 1.0], (0, LAM), OracleConfig(H))
    with pytest.raises(ValueError):
        OracleConfig(0.0)
    with pytest.raises(ValueError):
        StepPlasmaField(-1.0)


class _BrokenProfile:
    """Smooth field that turns into NaN past a given phase."""

    wavelength = LAM
    breakpoints = np.array([])

    def e_perp(self, phi, piece=None):
        if phi > 2 * LAM:
            return np.array([np.nan, 0.0])
        return np.array([1e6 * math.sin(2 * math.pi * phi / LAM), 0.0])


def test_failure_keeps_last_good_samples():
    wave = PlaneWave(_BrokenProfile())
    with pytest.raises(OracleError) as info:
        integrate(ELECTRON, wave, np.zeros(3), np.zeros(3), (0.0, 5 * LAM), OracleConfig(H), sample_every=10)
    good = info.value.last_good
    assert good is not None and good.trajectory.x0.size > 1
    assert np.all(np.isfinite(good.trajectory.x))
    assert good.trajectory.x0[-1] <= 2 * LAM + H


def test_invariants_for_smooth_pulse(gauss_circ):
    p, _ = gauss_circ
    res = integrate(ELECTRON, PlaneWave(p), np.zeros(3), np.zeros(3), (0.0, 40 * LAM), OracleConfig(H),
                    sample_every=20)
    L = p.support[1] - p.support[0]
    assert np.max(np.abs(res.mass_shell_res)) < 1e-9 * L / LAM
    assert np.max(res.canon_perp_res) < 1e-8
    assert np.max(res.gamma_integrated) > 1.5


def test_discontinuous_envelope_lands_on_edges():
    p = make_pulse("constant", "linear")
    res = integrate(ELECTRON, PlaneWave(p), np.zeros(3), np.zeros(3), (0.0, 20 * LAM), OracleConfig(H),
                    sample_every=100)
    assert res.landings >= 1
    assert np.max(np.abs(res.mass_shell_res)) < 1e-9 * 5
    # after the window the particle drifts with constant gamma
    g = res.gamma_integrated[-5:]
    np.testing.assert_allclose(g, g[0], rtol=1e-12)


def test_plasma_oscillation_frequency():
    # a displaced electron in the step plasma oscillates at omega_p, i.e. 2 sqrt(K) per unit x0
    plasma = StepPlasmaField(1e18)
    wave = PlaneWave(make_pulse("gaussian", "linear", w=0.0))
    Z = 10 * LAM
    d = 1e-4 * LAM
    period = math.pi / math.sqrt(plasma.K)
    cfg = OracleConfig(H, plasma=plasma, plasma_Z=Z)
    res = integrate(ELECTRON, wave, np.array([0, 0, Z + d]), np.zeros(3), (0.0, period), cfg, sample_every=50)
    t = res.trajectory.x0
    exact = d * np.cos(2 * math.sqrt(plasma.K) * t)
    np.testing.assert_allclose(res.trajectory.z - Z, exact, rtol=0, atol=1e-4 * d)


def test_convergence_skipped_for_zero_field():
    wave = PlaneWave(make_pulse("gaussian", "linear", w=0.0))
    rep = convergence_order(ELECTRON, wave, np.zeros(3), np.zeros(3), (0.0, 2 * LAM))
    assert rep.skipped and math.isnan(rep.order)


def test_convergence_fourth_order(gauss_circ):
    p, _ = gauss_circ
    center = 0.5 * (p.support[0] + p.support[1])
    rep = convergence_order(ELECTRON, PlaneWave(p), np.zeros(3), np.zeros(3), (0.0, center), base_step=LAM / 100)
    assert not rep.skipped
    assert rep.order == pytest.approx(4.0, abs=0.3)
