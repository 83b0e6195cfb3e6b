"""Invariant suites run by the ``validate`` subcommand.

Each suite takes a :class:`Context` and returns a list of :class:`Check`. A
suite that does not apply to the configuration (no plasma, zero field, a
discontinuous envelope) reports its checks as trivially satisfied.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import correction, oracle, poincare, ponderomotive
from .fields import PlaneWave
from .kinematics import Species, state_from_s, state_from_u
from .numerics import gauss_legendre
from .phase_functions import PhaseFunctions, build
from .pulse import ConstantEnvelope, Pulse, TabulatedEnvelope, slowness
from .zero_density import position_forward, position_inverse

__all__ = ["Check", "Context", "SUITES", "run_suites", "make_context"]


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool
    note: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        note = f"  ({self.note})" if self.note else ""
        return f"[{tag}] {self.suite}.{self.name}: {self.value:.3e} <= {self.tolerance:.1e}{note}"


def _check(suite, name, value, tol, note=""):
    value = float(value)
    return Check(suite, name, value, float(tol), bool(value <= tol), note)


@dataclass
class Context:
    species: Species
    pulse: Pulse
    pf: PhaseFunctions
    n0: float = 0.0
    direction: tuple = (0.0, 0.0, 1.0)
    x_init: tuple = (0.0, 0.0, 0.0)
    beta_init: tuple = (0.0, 0.0, 0.0)
    xi0: float | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def wavelength(self):
        return self.pulse.wavelength

    @property
    def length(self):
        """Support length, or one wavelength for an empty support."""
        start, end = self.pulse.support
        return max(end - start, self.wavelength) if not self.pulse.is_zero else self.wavelength

    def rng(self, salt):
        return np.random.default_rng([self.seed, salt])


def make_context(species, pulse, n0=0.0, direction=(0.0, 0.0, 1.0), x_init=(0.0, 0.0, 0.0),
                 beta_init=(0.0, 0.0, 0.0), xi0=None, seed=0, tol=1e-10):
    return Context(species, pulse, build(species, pulse, tol=tol), n0, tuple(direction), tuple(x_init),
                   tuple(beta_init), xi0, seed)


# -- suites ------------------------------------------------------------------


def suite_kinematics(ctx):
    rng = ctx.rng(1)
    u = rng.normal(scale=10.0, size=(1000, 2))
    s = np.exp(rng.uniform(-3, 3, 1000))
    st = state_from_s(u, s)
    back = state_from_u(st.u_perp, st.u_z)
    return [
        _check("kinematics", "mass_shell", np.max(np.abs(st.mass_shell_residual())), 1e-12),
        _check("kinematics", "s_roundtrip", np.max(np.abs(back.s - s) / s), 1e-10),
    ]


def suite_pulse(ctx):
    p = ctx.pulse
    start, end = p.support
    lam = ctx.wavelength
    outside = np.concatenate([np.linspace(-5 * lam, 0.0, 50), np.linspace(end, end + 5 * lam, 50)[1:]])
    leak = float(np.max(np.abs(p.e_perp(outside))))
    checks = [_check("pulse", "zero_outside_support", leak, 0.0)]
    # potential: panel quadrature of the field against the Chebyshev table
    xi = np.linspace(0.0, max(end, lam), 257)
    scale = max(abs(p.envelope.peak) / p.k, np.finfo(float).tiny)
    diff = np.max(np.abs(p.a_perp(xi) - ctx.pf.a_perp(xi))) / scale
    checks.append(_check("pulse", "a_perp_two_routes", diff, 1e-8))
    return checks


def suite_phase_functions(ctx):
    pf = ctx.pf
    xi = _phase_grid(ctx, 2001)
    st = pf.state(xi)
    s_err = np.max(np.abs(st.gamma - st.u_z - 1.0))
    Xi = pf.Xi(xi)
    mono = float(np.max(np.maximum(-np.diff(Xi), 0.0)))
    inv = np.max(np.abs(pf.xi_inverse(Xi) - xi)) / ctx.length
    # Y3 at the end of the grid by direct Gauss quadrature of |u_perp|^2 / 2
    y3_direct = _gauss_integral(lambda x: 0.5 * np.sum(pf.u_perp(x) ** 2, axis=-1), pf.breaks)
    y3_tab = float(pf.Y3(pf.breaks[-1]))
    y3_rel = abs(y3_direct - y3_tab) / max(abs(y3_tab), np.finfo(float).tiny) if y3_tab else abs(y3_direct)
    return [
        _check("phase_functions", "s_invariant", s_err, 1e-10),
        _check("phase_functions", "Xi_monotone", mono, 0.0),
        _check("phase_functions", "xi_inverse_roundtrip", inv, 1e-12),
        _check("phase_functions", "Y3_two_routes", y3_rel, 1e-10),
    ]


def suite_zero_density(ctx):
    pf = ctx.pf
    rng = ctx.rng(2)
    L = ctx.length
    n = 1000
    x0 = rng.uniform(0.0, 2.0 * L, n)
    X = np.column_stack([rng.uniform(-L, L, n), rng.uniform(-L, L, n), rng.uniform(-L, L, n)])
    traj = position_forward(pf, x0, X)
    back = position_inverse(pf, x0, traj.x)
    again = position_forward(pf, x0, back)
    checks = [
        _check("zero_density", "inverse_after_forward_cm", np.max(np.abs(back - X)), 1e-10),
        _check("zero_density", "forward_after_inverse_cm", np.max(np.abs(again.x - traj.x)), 1e-10),
    ]
    # the oracle, particle at rest at the origin
    lam = ctx.wavelength
    t_end = float(pf.Xi(pf.support_end)) + lam
    res = oracle.integrate(ctx.species, PlaneWave(ctx.pulse), [0, 0, 0], [0, 0, 0], (0.0, t_end),
                           oracle.OracleConfig(lam / 200), sample_every=10)
    ana = position_forward(pf, res.trajectory.x0, np.zeros(3))
    err = np.max(np.abs(ana.x - res.trajectory.x)) / L
    checks.append(_check("zero_density", "oracle_agreement_rel", err, 1e-7))
    return checks


def suite_ponderomotive(ctx):
    p, pf, sp = ctx.pulse, ctx.pf, ctx.species
    lam = ctx.wavelength
    start, end = p.support
    smooth = not isinstance(p.envelope, (ConstantEnvelope, TabulatedEnvelope))
    if p.is_zero or end - start < 6 * lam or not smooth:
        why = "zero field" if p.is_zero else ("envelope not C1" if not smooth else "support too short")
        return [_check("ponderomotive", "not_applicable", 0.0, 0.0, why)]
    xi = np.linspace(start + 2 * lam, end - 2 * lam, 400)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        Fp = ponderomotive.ponderomotive_force(sp, p, pf, xi, check_slowness=False)
    scale = max(float(np.max(np.abs(Fp))), np.finfo(float).tiny)
    if p.polarization == "circular":
        Fm = ponderomotive.magnetic_force(sp, p, pf, xi, "envelope")
        return [_check("ponderomotive", "circular_identity", np.max(np.abs(Fm - Fp)) / scale, 1e-9)]
    delta = slowness(p).delta
    avg = ponderomotive.cycle_average(lambda x: ponderomotive.magnetic_force(sp, p, pf, x, "exact"), xi, lam)
    return [_check("ponderomotive", "linear_cycle_average", np.max(np.abs(avg - Fp)) / scale, 5 * delta,
                   f"delta={delta:.3g}")]


def suite_test_particle(ctx):
    rng = ctx.rng(3)
    lam = ctx.wavelength
    beta = np.asarray(ctx.beta_init, dtype=float)
    if not np.any(beta):
        beta = np.array([0.3, -0.2, 0.1])
    x_init = np.asarray(ctx.x_init, dtype=float)
    wave = PlaneWave(ctx.pulse, ctx.direction)
    P, cut = poincare.reduce(wave, x_init, beta)
    M = P.matrix
    R = P.rotation
    ortho = max(np.max(np.abs(R @ R.T - np.eye(3))), abs(np.linalg.det(R) - 1.0))
    ev = rng.uniform(-10 * lam, 10 * lam, (1000, 4))
    rt = np.max(np.abs(P.inverse(P.forward(ev)) - ev))
    checks = [
        _check("test_particle", "rotation_orthogonal", ortho, 1e-12),
        _check("test_particle", "transform_roundtrip_cm", rt, 1e-10),
        _check("test_particle", "boost_preserves_metric",
               np.max(np.abs(M.T @ np.diag([1, -1, -1, -1]) @ M - np.diag([1, -1, -1, -1]))), 1e-12),
    ]
    L = ctx.length
    t_end = 4.0 * (L + np.linalg.norm(x_init)) / max(cut.doppler, 1e-3) + lam
    res = oracle.integrate(ctx.species, wave, x_init, beta, (0.0, t_end), oracle.OracleConfig(lam / 200),
                           sample_every=20)
    traj = poincare.solve_arbitrary_ic(ctx.species, wave, x_init, beta, res.trajectory.x0)
    exc = max(np.max(np.linalg.norm(res.trajectory.x - x_init, axis=1)), lam)
    err = np.max(np.linalg.norm(traj.x - res.trajectory.x, axis=1)) / exc
    u = np.concatenate([traj.state.u_perp, traj.state.u_z[:, None]], axis=1)
    inv = np.max(np.abs(traj.state.gamma - u @ wave.n - cut.doppler)) / cut.doppler
    checks += [
        _check("test_particle", "oracle_agreement_rel", err, 1e-6),
        _check("test_particle", "light_front_invariant", inv, 1e-10),
    ]
    return checks


def suite_correction(ctx):
    if not ctx.n0 > 0:
        return [_check("correction", "not_applicable", 0.0, 0.0, "no plasma")]
    pf = ctx.pf
    setup = correction.PlasmaSetup(ctx.n0)
    xi0 = ctx.xi0 if ctx.xi0 is not None else pf.support_end
    fc = correction.FirstCorrection(pf, setup, xi_max=max(xi0, pf.support_end))
    rng = ctx.rng(4)
    lam = ctx.wavelength
    Z = rng.uniform(0.0, 5 * lam, 400)
    x0 = Z + rng.uniform(0.0, float(pf.Xi(xi0)), 400)
    dz0 = fc.dz0(x0, Z)
    dz1 = fc.dz1(x0, Z)
    order = float(np.max(np.maximum(dz1 - dz0, 0.0)))
    checks = [_check("correction", "ordering_dz1_le_dz0_cm", order, 0.0)]
    zeta = float(pf.Y3(xi0))
    m = dz0 > 1e-9 * zeta
    if np.any(m):
        xi = pf.xi_inverse(x0[m] - Z[m])
        rel = np.max(np.abs((dz0[m] - dz1[m]) / dz0[m] - fc.T(xi)))
        checks.append(_check("correction", "reldif_identity", rel, 1e-6))
    r_closed = correction.r0(pf, setup, x0[:50], Z[:50])
    r_quad = correction.r0_integral(pf, setup, x0[:50], Z[:50])
    scale = max(float(np.max(np.abs(r_closed))), np.finfo(float).tiny)
    checks.append(_check("correction", "r0_two_routes", np.max(np.abs(r_closed - r_quad)) / scale, 1e-8))
    return checks


def suite_oracle(ctx):
    # pulse only: the invariants below hold for the vacuum equations of motion
    lam = ctx.wavelength
    pf = ctx.pf
    t_end = float(pf.Xi(pf.support_end)) + lam
    res = oracle.integrate(ctx.species, PlaneWave(ctx.pulse), [0, 0, 0], [0, 0, 0], (0.0, t_end),
                           oracle.OracleConfig(lam / 200), sample_every=10)
    u_scale = max(float(np.max(np.linalg.norm(res.trajectory.state.u_perp, axis=-1))), 1.0)
    per_length = ctx.length / lam
    return [
        _check("oracle", "mass_shell", np.max(np.abs(res.mass_shell_res)), 1e-9 * per_length,
               f"1e-9 per wavelength of pulse length, {per_length:.3g} wavelengths"),
        _check("oracle", "canonical_momentum_rel", np.max(res.canon_perp_res) / u_scale, 1e-8),
    ]


SUITES = {
    "kinematics": suite_kinematics,
    "pulse": suite_pulse,
    "phase_functions": suite_phase_functions,
    "zero_density": suite_zero_density,
    "ponderomotive": suite_ponderomotive,
    "test_particle": suite_test_particle,
    "correction": suite_correction,
    "oracle": suite_oracle,
}


def run_suites(ctx, names=None, threads=1):
    """Run suites (in parallel with ``threads > 1``); results keep the suite order.

    Returns ``(checks, timings)``. An exception inside a suite becomes a failed
    check naming the exception.
    """
    names = list(SUITES) if names is None else list(names)

    def one(name):
        t = time.perf_counter()
        try:
            out = SUITES[name](ctx)
        except Exception as exc:  # reported, not raised: the other suites still run
            out = [Check(name, "error", math.inf, 0.0, False, f"{type(exc).__name__}: {exc}")]
        return out, time.perf_counter() - t

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, names))
    else:
        results = [one(n) for n in names]
    checks = [c for r, _ in results for c in r]
    timings = {n: dt for n, (_, dt) in zip(names, results)}
    return checks, timings


# -- helpers -------------------------------------------------------------------


def _phase_grid(ctx, n):
    end = max(ctx.pf.support_end, ctx.wavelength)
    return np.linspace(0.0, end + ctx.wavelength, n)


def _gauss_integral(func, breaks, order=24):
    t, w = gauss_legendre(order)
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1, None], breaks[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * t
    return float(np.sum(func(x) * 0.5 * (b - a) * w))
