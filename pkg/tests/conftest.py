import math

import numpy as np
import pytest

from coldplasma.kinematics import ELECTRON
from coldplasma.phase_functions import build
from coldplasma.pulse import (
    ConstantEnvelope,
    GAUSSIAN_CUTOFF,
    GaussianEnvelope,
    PolynomialEnvelope,
    Pulse,
    peak_field_for_w,
)

LAM = 1e-4
# gaussian whose truncated support is exactly [0, 2 xi0]
FLAME_XI0 = 1e-3
FLAME_WIDTH = FLAME_XI0 / math.sqrt(math.log(1.0 / GAUSSIAN_CUTOFF))

ACCEPTANCE_LINES = []


def make_pulse(kind, polarization, w=1.0, lam=LAM, size=None, center=None):
    peak = peak_field_for_w(w, lam)
    if kind == "gaussian":
        env = GaussianEnvelope(peak, size if size is not None else 3 * lam, center)
    elif kind == "polynomial":
        env = PolynomialEnvelope(peak, size if size is not None else 10 * lam)
    elif kind == "constant":
        env = ConstantEnvelope(peak, size if size is not None else 5 * lam)
    else:
        raise ValueError(kind)
    return Pulse(env, lam, polarization)


def flame_pulse():
    return Pulse(GaussianEnvelope(peak_field_for_w(5.0, LAM), FLAME_WIDTH, FLAME_XI0), LAM, "circular")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def gauss_circ():
    p = make_pulse("gaussian", "circular")
    return p, build(ELECTRON, p)


@pytest.fixture(scope="session")
def gauss_lin():
    p = make_pulse("gaussian", "linear")
    return p, build(ELECTRON, p)


@pytest.fixture(scope="session")
def flame():
    p = flame_pulse()
    return p, build(ELECTRON, p)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
