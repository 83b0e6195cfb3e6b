import warnings

import numpy as np
import pytest

from coldplasma.kinematics import ELECTRON, POSITRON, PROTON
from coldplasma.phase_functions import build
from coldplasma.ponderomotive import (
    cycle_average,
    density_ratio,
    force_profile,
    magnetic_force,
    mu,
    ponderomotive_force,
)
from coldplasma.pulse import slowness

from conftest import LAM, make_pulse


def quiet_force(species, pulse, pf, xi):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return ponderomotive_force(species, pulse, pf, xi)


def test_vanishes_outside_support(gauss_lin):
    p, pf = gauss_lin
    xi = np.array([-LAM, -1e-9, p.support[1] + 1e-9, p.support[1] + 5 * LAM])
    np.testing.assert_array_equal(quiet_force(ELECTRON, p, pf, xi), 0.0)
    np.testing.assert_array_equal(magnetic_force(ELECTRON, p, pf, xi, "exact"), 0.0)


def test_circular_constant_interior_is_forceless():
    p = make_pulse("constant", "circular", w=0.8)
    pf = build(ELECTRON, p)
    xi = np.linspace(0.1 * LAM, 4.9 * LAM, 50)
    np.testing.assert_array_equal(ponderomotive_force(ELECTRON, p, pf, xi), 0.0)
    assert np.max(np.abs(magnetic_force(ELECTRON, p, pf, xi, "envelope"))) == 0.0


@pytest.mark.parametrize("species", [ELECTRON, POSITRON, PROTON])
def test_rising_edge_pushes_forward(species):
    p = make_pulse("polynomial", "linear", size=20 * LAM)
    pf = build(species, p)
    xi = np.linspace(0.5 * LAM, 9.5 * LAM, 200)
    assert np.all(quiet_force(species, p, pf, xi) > 0)
    xi = np.linspace(10.5 * LAM, 19.5 * LAM, 200)
    assert np.all(quiet_force(species, p, pf, xi) < 0)


def test_circular_is_twice_linear():
    size = 20 * LAM
    pc, pl = make_pulse("polynomial", "circular", size=size), make_pulse("polynomial", "linear", size=size)
    fc, fl = build(ELECTRON, pc), build(ELECTRON, pl)
    xi = np.linspace(LAM, 19 * LAM, 300)
    # compare per unit mu: gamma differs between the two polarizations
    rc = quiet_force(ELECTRON, pc, fc, xi) / mu(ELECTRON, pc, fc, xi)
    rl = quiet_force(ELECTRON, pl, fl, xi) / mu(ELECTRON, pl, fl, xi)
    np.testing.assert_allclose(rc, 2 * rl, rtol=1e-13)


def test_species_scaling(gauss_circ):
    p, _ = gauss_circ
    xi = np.linspace(LAM, 8 * LAM, 100)
    reduced = []
    for sp in (ELECTRON, POSITRON, PROTON):
        pf = build(sp, p)
        reduced.append(quiet_force(sp, p, pf, xi) * pf.gamma(xi) * sp.mass / sp.charge**2)
    np.testing.assert_allclose(reduced[1], reduced[0], rtol=1e-12)
    np.testing.assert_allclose(reduced[2], reduced[0], rtol=1e-12)


def test_circular_envelope_force_is_its_own_average(gauss_circ):
    p, pf = gauss_circ
    xi = np.linspace(p.support[0], p.support[1], 500)
    Fp = quiet_force(ELECTRON, p, pf, xi)
    Fm = magnetic_force(ELECTRON, p, pf, xi, "envelope")
    assert np.max(np.abs(Fm - Fp)) < 1e-9 * np.max(np.abs(Fp))


def test_linear_cycle_average_within_slowness():
    p = make_pulse("gaussian", "linear", w=0.01, size=20 * LAM)
    pf = build(ELECTRON, p)
    delta = slowness(p).delta
    start, end = p.support
    xi = np.linspace(start + 2 * LAM, end - 2 * LAM, 400)
    Fp = quiet_force(ELECTRON, p, pf, xi)
    avg = cycle_average(lambda x: magnetic_force(ELECTRON, p, pf, x, "exact"), xi, LAM)
    assert np.max(np.abs(avg - Fp)) < 5 * delta * np.max(np.abs(Fp))
    # a single boxcar pass leaves the second harmonic at full strength
    box = cycle_average(lambda x: magnetic_force(ELECTRON, p, pf, x, "exact"), xi, LAM, passes=1)
    assert np.max(np.abs(box - Fp)) > 0.5 * np.max(np.abs(Fp))


def test_cycle_average_of_pure_harmonic():
    k = 2 * np.pi / LAM
    xi = np.linspace(0, 3 * LAM, 31)
    for passes in (1, 2):
        out = cycle_average(lambda x: 1.0 + np.sin(k * x) + np.cos(2 * k * x), xi, LAM, passes=passes)
        np.testing.assert_allclose(out, 1.0, atol=1e-13)
    with pytest.raises(ValueError):
        cycle_average(np.sin, xi, LAM, passes=3)


def test_warning_for_fast_envelope():
    p = make_pulse("gaussian", "linear", size=LAM)
    pf = build(ELECTRON, p)
    assert slowness(p).delta > 0.3
    with pytest.warns(RuntimeWarning, match="slowness"):
        ponderomotive_force(ELECTRON, p, pf, np.array([LAM]))


def test_unknown_form_rejected(gauss_lin):
    p, pf = gauss_lin
    with pytest.raises(ValueError):
        magnetic_force(ELECTRON, p, pf, 1.0, form="bogus")


def test_profile_csv_and_density(gauss_circ, tmp_path):
    p, pf = gauss_circ
    xi = np.linspace(0, 10 * LAM, 11)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        prof = force_profile(ELECTRON, p, pf, xi)
    path = tmp_path / "f.csv"
    prof.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "xi,Fm,Fp" and len(lines) == 12
    np.testing.assert_array_equal(density_ratio(pf, xi), pf.gamma(xi))
    assert np.all(density_ratio(pf, xi) >= 1.0)
