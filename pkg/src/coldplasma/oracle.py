"""Brute-force integrator of the Lorentz equations in prescribed fields.

Classical fourth-order Runge-Kutta in lab time ``x0`` on the state
``(x, u, gamma)``::

    dx/dx0     = u / gamma
    du/dx0     = (q / m c^2) (E + beta x B)
    dgamma/dx0 = (q / m c^2) E . beta

``gamma`` is integrated from the power balance rather than recomputed from
``u``, so its drift off the mass shell measures the integration error. When a
step would carry the particle across an envelope breakpoint (a phase where the
field or its derivative jumps), the step is split so that a sub-step ends
exactly on it; fields on each side come from the one-sided smooth formulas.

Nothing here uses the tabulated phase functions: the oracle is independent
of the analytical solution it is meant to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .fields import PlaneWave, StepPlasmaField
from .kinematics import Species, state_from_u
from .numerics import NumericalError
from .zero_density import Trajectory

__all__ = [
    "OracleConfig",
    "OracleResult",
    "OracleError",
    "ConvergenceReport",
    "integrate",
    "convergence_order",
    "MAX_STEP_FRACTION",
]

MAX_STEP_FRACTION = 1.0 / 50


class OracleError(NumericalError):
    """Integration failure; ``last_good`` holds the samples produced so far."""

    def __init__(self, msg, last_good=None):
        super().__init__(msg)
        self.last_good = last_good


@dataclass(frozen=True)
class OracleConfig:
    """Step in ``x0`` (cm) and optional step-plasma field.

    ``plasma_Z`` is the initial longitudinal position that labels the
    particle in the plasma field; it defaults to the initial ``z``.
    """

    step: float
    plasma: StepPlasmaField | None = None
    plasma_Z: float | None = None

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError(f"oracle step must be positive, got {self.step}")


@dataclass(frozen=True)
class OracleResult:
    trajectory: Trajectory
    mass_shell_res: np.ndarray
    canon_perp_res: np.ndarray
    gamma_integrated: np.ndarray
    landings: int = 0
    extra: dict = field(default_factory=dict)


def integrate(species: Species, wave: PlaneWave, x_init, beta_init, t_span, config: OracleConfig,
              sample_every=1) -> OracleResult:
    """Integrate one trajectory from ``t_span[0]`` to ``t_span[1]``.

    Samples are taken on the uniform grid ``t0 + i * step`` (every
    ``sample_every``-th point, plus the end point when it falls on the grid).
    ``t1 - t0`` is rounded up to a whole number of steps.

    Raises
    ------
    ValueError
        If ``|beta_init| >= 1`` or the step exceeds ``wavelength / 50``.
    OracleError
        If the state becomes non-finite or superluminal.
    """
    beta0 = np.asarray(beta_init, dtype=float)
    b2 = float(beta0 @ beta0)
    if not b2 < 1.0:
        raise ValueError(f"|beta_init| = {math.sqrt(b2):.6g} must be < 1")
    h = config.step
    if h > MAX_STEP_FRACTION * wave.wavelength * (1 + 1e-12):
        raise ValueError(f"oracle step {h:g} exceeds wavelength/50 = {wave.wavelength / 50:g}")
    t0, t1 = map(float, t_span)
    nsteps = max(0, int(math.ceil((t1 - t0) / h - 1e-9)))

    g0 = 1.0 / math.sqrt(1.0 - b2)
    y = np.concatenate([np.asarray(x_init, dtype=float), g0 * beta0, [g0]])
    kappa = species.coupling
    n = wave.n
    rot = wave._rot
    prof = wave.profile
    plasma = config.plasma
    Zlab = float(x_init[2]) if config.plasma_Z is None else float(config.plasma_Z)
    plasma_on = plasma is not None and plasma.n0 > 0
    bps = wave.breakpoints

    def rhs(t, y, piece):
        x, u, g = y[:3], y[3:6], y[6]
        beta = u / g
        phi = t - x @ n
        p = prof.e_perp(phi, piece)
        E = p[0] * rot[:, 0] + p[1] * rot[:, 1]
        B = np.cross(n, E)
        if plasma_on:
            E = E + np.array([0.0, 0.0, float(plasma.E_z(x[2], Zlab))])
        du = kappa * (E + np.cross(beta, B))
        return np.concatenate([beta, du, [kappa * (E @ beta)]])

    def rk4(t, y, dt, piece):
        k1 = rhs(t, y, piece)
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1, piece)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2, piece)
        k4 = rhs(t + dt, y + dt * k3, piece)
        return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def phase(t, y):
        return t - y[:3] @ n

    piece = int(np.searchsorted(bps, phase(t0, y), side="right"))
    keep = [0] + [i for i in range(1, nsteps + 1) if i % sample_every == 0 or i == nsteps]
    out_t = np.empty(len(keep))
    out_y = np.empty((len(keep), 7))
    out_t[0], out_y[0] = t0, y
    j = 1
    landings = 0
    t = t0
    for i in range(1, nsteps + 1):
        t_next = t0 + i * h
        while True:
            dt = t_next - t
            trial = rk4(t, y, dt, piece)
            if piece < bps.size and phase(t_next, trial) > bps[piece]:
                b = bps[piece]
                f = lambda s: phase(t + s, rk4(t, y, s, piece)) - b  # noqa: E731
                if f(0.0) >= 0:
                    s = 0.0
                else:
                    s = optimize.brentq(f, 0.0, dt, xtol=1e-15 * max(abs(t), h), rtol=4 * np.finfo(float).eps)
                if s > 0:
                    y = rk4(t, y, s, piece)
                    t = t + s
                piece += 1
                landings += 1
                continue
            y, t = trial, t_next
            break
        g = y[6]
        u2 = y[3:6] @ y[3:6]
        if not (np.all(np.isfinite(y)) and g > 0 and g * g - u2 > 0):
            good = _finish(species, wave, out_t[:j], out_y[:j], y0=out_y[0], landings=landings)
            raise OracleError(f"oracle state became unphysical at x0={t:.6g} (gamma={g:.6g})", good)
        if i == keep[min(j, len(keep) - 1)] and j < len(keep):
            out_t[j], out_y[j] = t, y
            j += 1
    return _finish(species, wave, out_t[:j], out_y[:j], y0=out_y[0], landings=landings)


def _finish(species, wave, ts, ys, y0, landings):
    x = ys[:, :3]
    u = ys[:, 3:6]
    g_int = ys[:, 6]
    e1, e2 = wave.basis
    u_perp = np.stack([u @ e1, u @ e2], axis=-1)
    lab_state = state_from_u(u[:, :2], u[:, 2])
    mass = (g_int**2 - np.sum(u**2, axis=1) - 1.0) / g_int**2
    canon = np.zeros(ts.shape)
    if hasattr(wave.profile, "a_perp") and ts.size:
        phi = ts - x @ wave.n
        a = wave.a_components(phi)
        phi0 = ts[0] - y0[:3] @ wave.n
        a0 = wave.a_components(np.array([phi0]))[0]
        u0p = np.array([y0[3:6] @ e1, y0[3:6] @ e2])
        inv = u_perp + species.coupling * a - (u0p + species.coupling * a0)
        canon = np.linalg.norm(inv, axis=-1)
    return OracleResult(Trajectory(ts, x, lab_state), mass, canon, g_int, landings)


@dataclass(frozen=True)
class ConvergenceReport:
    order: float
    errors: tuple
    steps: tuple
    skipped: bool = False


def convergence_order(species, wave, x_init, beta_init, t_span, base_step=None, plasma=None,
                      plasma_Z=None, noise=1e-13) -> ConvergenceReport:
    """Global order from three runs at steps ``h, h/2, h/4`` (default ``h = wavelength/50``).

    The error of each run is the maximum position difference to the next finer
    run on the common grid, relative to the largest excursion. If the errors are
    at rounding level the order is reported as nan with ``skipped=True``.

    The window should end while the pulse still acts on the particle: once a
    smooth pulse has passed, the remaining error is that of a composite rule on
    a compactly supported integrand, which converges faster than ``h^4`` and
    inflates the measured order.
    """
    h = wave.wavelength * MAX_STEP_FRACTION if base_step is None else base_step
    t0, t1 = t_span
    nsteps = int(math.ceil((t1 - t0) / h - 1e-9))
    t1 = t0 + nsteps * h
    runs = []
    for m in (1, 2, 4):
        cfg = OracleConfig(step=h / m, plasma=plasma, plasma_Z=plasma_Z)
        res = integrate(species, wave, x_init, beta_init, (t0, t1), cfg, sample_every=m)
        runs.append(res.trajectory.x)
    scale = max(np.max(np.abs(runs[-1] - np.asarray(x_init, dtype=float))), wave.wavelength)
    e1 = np.max(np.abs(runs[0] - runs[1])) / scale
    e2 = np.max(np.abs(runs[1] - runs[2])) / scale
    if e2 <= noise or e1 <= noise:
        return ConvergenceReport(float("nan"), (e1, e2), (h, h / 2, h / 4), skipped=True)
    return ConvergenceReport(math.log2(e1 / e2), (e1, e2), (h, h / 2, h / 4))
