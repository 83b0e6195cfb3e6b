"""First correction to the zero-density motion in a step-density plasma.

Electrons fill ``Z >= 0`` with density ``n0`` on top of static ions. The
longitudinal field is ``E^z = 4 pi e n0 [z theta(z) - Z_e theta(Z_e)]`` and the
first corrected approximation replaces ``s = 1`` by ``s1 = exp(r0)`` with::

    r0(x0, Z) = 4K int_Z^x0 deta  dz0 / gamma0 = 4K V3(Xi^{-1}(x0 - Z)),
    K = pi e^2 n0 / (m_e c^2).

For ``Z >= 0`` ``r0`` depends on ``(x0, Z)`` only through the phase
``xi = Xi^{-1}(x0 - Z)``; so do ``s1``, ``beta_z1`` and the validity
functionals::

    g = (1 + 2 u_z) (e^{2 r0} - 1) / (1 + 2 u_z + e^{2 r0}),   G = int_0^xi g,   T = G / Y3.

The transverse correction is the light-cone integral::

    u1 - u0 = -(2 pi e^2 / m_e c^2) int_D n0 theta(Z0(x')) gamma0 beta0_perp d^2x'

over ``D = {0 <= x0' <= x0, |z - z'| <= x0 - x0'}``. In characteristic
coordinates ``(xi', xi-')`` with ``d^2x = dxi' dxi-' / 2`` the integrand is
``u0_perp(xi')`` on ``xi' + 2 Y3(xi') <= xi-' <= xi-``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import CGS, ERG_PER_MEV
from .io import write_csv
from .kinematics import KinematicState, state_from_s
from .numerics import NumericalError, PiecewiseChebyshev, gauss_legendre, monotone_solve, panel_breaks
from .phase_functions import PhaseFunctions
from .zero_density import displacement, position_inverse

__all__ = [
    "PlasmaSetup",
    "FirstCorrection",
    "CorrectionState",
    "ValidityReport",
    "SlingshotReport",
    "longitudinal_field",
    "r0",
    "corrected_state",
    "corrected_displacement",
    "validity",
    "slingshot",
    "corrected_vector_potential",
    "DEFAULT_THRESHOLD",
]

DEFAULT_THRESHOLD = 0.1


@dataclass(frozen=True)
class PlasmaSetup:
    """Initial electron (and ion) density.

    The default profile is the step ``n0 theta(Z)``. A tabulated profile
    ``(Z_nodes, n_nodes)`` (linear interpolation, zero outside) may replace it;
    ``n0`` then only sets ``K``.
    """

    n0: float
    profile: tuple | None = None

    def __post_init__(self):
        if not (math.isfinite(self.n0) and self.n0 >= 0):
            raise ValueError(f"density n0 must be finite and nonnegative, got {self.n0}")
        if self.profile is not None:
            z, n = (np.asarray(v, dtype=float) for v in self.profile)
            if z.ndim != 1 or z.shape != n.shape or z.size < 2 or np.any(np.diff(z) <= 0) or np.any(n < 0):
                raise ValueError("tabulated density needs increasing Z nodes and nonnegative densities")

    @property
    def K(self):
        """``pi e^2 n0 / (m_e c^2) = pi r_e n0`` in 1/cm^2."""
        return math.pi * CGS.r_e * self.n0

    def cumulative(self, Z):
        """``N(Z) = int_{-inf}^Z n`` (cm^-2) of the initial profile."""
        Z = np.asarray(Z, dtype=float)
        if self.profile is None:
            return self.n0 * np.maximum(Z, 0.0)
        zn, nn = (np.asarray(v, dtype=float) for v in self.profile)
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (nn[1:] + nn[:-1]) * np.diff(zn))])
        i = np.clip(np.searchsorted(zn, Z, side="right") - 1, 0, zn.size - 2)
        dz = np.clip(Z - zn[i], 0.0, zn[i + 1] - zn[i])
        slope = (nn[i + 1] - nn[i]) / (zn[i + 1] - zn[i])
        partial = nn[i] * dz + 0.5 * slope * dz**2
        out = cum[i] + partial
        return np.where(Z <= zn[0], 0.0, np.where(Z >= zn[-1], cum[-1], out))

    def neutrality_residual(self, Z):
        """``sum_h q_h N_h(Z)`` for electrons and singly charged ions with the same profile."""
        N = self.cumulative(Z)
        return CGS.e * N - CGS.e * N


def longitudinal_field(setup: PlasmaSetup, x0, z, Z_e):
    """``E^z = 4 pi e [N(z) - N(Z_e)]`` (statvolt/cm); ``x0`` enters only through ``Z_e``."""
    del x0
    return 4.0 * math.pi * CGS.e * (setup.cumulative(z) - setup.cumulative(Z_e))


def _require_plasma_side(Z):
    if np.any(np.asarray(Z) < 0):
        raise ValueError("the first correction is defined for electrons initially in the plasma (Z >= 0)")


def r0(pf: PhaseFunctions, setup: PlasmaSetup, x0, Z, check=False, rtol=1e-8):
    """``4K V3(Xi^{-1}(x0 - Z))``; with ``check`` also the direct integral form, asserting agreement."""
    _require_plasma_side(Z)
    xi = pf.xi_inverse(np.asarray(x0, dtype=float) - np.asarray(Z, dtype=float))
    out = 4.0 * setup.K * pf.V3(xi)
    if check:
        direct = r0_integral(pf, setup, x0, Z)
        scale = np.maximum(np.abs(out), 4.0 * setup.K * pf.wavelength**2 * 1e-300)
        bad = np.abs(direct - out) > rtol * scale + 1e-300
        if np.any(bad):
            raise NumericalError(f"r0: integral and V3 forms disagree at {int(np.sum(bad))} points "
                                 f"(max relative {np.max(np.abs(direct - out) / scale):.3e})")
    return out


def r0_integral(pf: PhaseFunctions, setup: PlasmaSetup, x0, Z, order=24):
    """``4K int_Z^x0 deta  dz0(eta, Z) / gamma0(eta, Z)`` by Gauss-Legendre in lab time.

    Panels in ``eta`` are the images ``Xi(xi_i) + Z`` of the phase panels, so
    the integrand is smooth on each.
    """
    x0 = np.asarray(x0, dtype=float)
    Z = np.asarray(Z, dtype=float)
    x0, Z = np.broadcast_arrays(x0, Z)
    t, w = gauss_legendre(order)
    nodes = pf.Xi(pf.breaks)
    out = np.zeros(x0.shape)
    for idx in np.ndindex(x0.shape):
        a, b = Z[idx], x0[idx]
        if b <= a:
            continue
        edges = np.concatenate([[0.0], nodes[(nodes > 0) & (nodes < b - a)], [b - a]]) + a
        h = 0.5 * np.diff(edges)
        eta = (0.5 * (edges[:-1] + edges[1:]))[:, None] + h[:, None] * t[None, :]
        xi = pf.xi_inverse(eta - a)
        f = displacement(pf, eta, a) / pf.gamma(xi)
        out[idx] = np.sum(h[:, None] * w[None, :] * f)
    return 4.0 * setup.K * out


@dataclass(frozen=True)
class CorrectionState:
    xi: np.ndarray
    r0: np.ndarray
    s1: np.ndarray
    state: KinematicState

    @property
    def beta_z1(self):
        return self.state.beta_z


def corrected_state(pf: PhaseFunctions, setup: PlasmaSetup, xi) -> CorrectionState:
    """``s1 = exp(4K V3(xi))`` with the zero-density ``u_perp``, recovered through the s-formulas."""
    xi = np.asarray(xi, dtype=float)
    r = 4.0 * setup.K * pf.V3(xi)
    s1 = np.exp(r)
    return CorrectionState(xi, r, s1, state_from_s(pf.u_perp(xi), s1))


def beta_z1_closed(u_perp2, r):
    """``(1 + u^2 - e^{2r}) / (1 + u^2 + e^{2r})``."""
    e2r = np.exp(2.0 * r)
    return (1.0 + u_perp2 - e2r) / (1.0 + u_perp2 + e2r)


class FirstCorrection:
    """Phase tables of the first correction for one zero-density solution and plasma.

    ``dz1(xi) = int_0^xi gamma0 beta_z1`` and ``G(xi) = int_0^xi g`` are built as
    independent adaptive Chebyshev fits on the phase panels (``g`` from its
    closed form, not from ``gamma0 (beta_z0 - beta_z1)``), then integrated exactly.
    """

    def __init__(self, pf: PhaseFunctions, setup: PlasmaSetup, xi_max=None, tol=1e-12):
        self.pf = pf
        self.setup = setup
        self.K = setup.K
        end = max(pf.support_end, pf.wavelength)
        self.xi_max = float(max(end, pf.xi_max if xi_max is None else xi_max))
        breaks = np.asarray(pf.breaks, dtype=float)
        if self.xi_max > breaks[-1]:
            breaks = np.concatenate([breaks, panel_breaks(breaks[-1], self.xi_max, pf.wavelength / 32)[1:]])
        self.breaks = breaks

        def gb(x):
            st = corrected_state(pf, setup, x)
            return pf.gamma(x) * st.beta_z1

        def g(x):
            return self._g(x)

        uz_scale = 1.0 + float(np.max(pf.u_z(breaks)))
        self._dz1 = PiecewiseChebyshev.fit_adaptive(gb, breaks, 24, tol, scale=uz_scale).antiderivative()
        g_scale = max(float(np.max(np.abs(self._g(breaks)))), np.finfo(float).tiny)
        self._G = PiecewiseChebyshev.fit_adaptive(g, breaks, 24, tol, scale=g_scale).antiderivative()

    def _g(self, xi):
        A = 1.0 + 2.0 * self.pf.u_z(xi)
        E = np.exp(8.0 * self.K * self.pf.V3(xi))
        return A * np.expm1(8.0 * self.K * self.pf.V3(xi)) / (A + E)

    def _table(self, pc, xi):
        xi = np.asarray(xi, dtype=float)
        if np.any(xi > self.xi_max * (1 + 1e-12)):
            raise ValueError(f"phase beyond the correction table (xi_max={self.xi_max:g})")
        return np.where(xi > 0, pc(np.clip(xi, 0.0, self.xi_max)), 0.0)

    def g(self, xi):
        xi = np.asarray(xi, dtype=float)
        return np.where(xi > 0, self._g(np.maximum(xi, 0.0)), 0.0)

    def G(self, xi):
        return self._table(self._G, xi)

    def dz1_phase(self, xi):
        return self._table(self._dz1, xi)

    def T(self, xi):
        """``G / Y3``; zero where ``Y3`` vanishes."""
        xi = np.asarray(xi, dtype=float)
        y3 = self.pf.Y3(xi)
        G = self.G(xi)
        tiny = np.finfo(float).tiny
        return np.divide(G, y3, out=np.zeros_like(G), where=y3 > tiny)

    def dz0(self, x0, Z):
        return displacement(self.pf, x0, Z)

    def dz1(self, x0, Z):
        _require_plasma_side(Z)
        xi = self.pf.xi_inverse(np.asarray(x0, dtype=float) - np.asarray(Z, dtype=float))
        return self.dz1_phase(xi)

    def write_csv(self, path, xi, Z=0.0):
        """Columns ``xi,r0,s1,beta_z1,dz0,dz1,T`` for electrons starting at ``Z``."""
        xi = np.asarray(xi, dtype=float)
        st = corrected_state(self.pf, self.setup, xi)
        dz0 = self.pf.Y3(xi)
        dz1 = self.dz1_phase(xi)
        cols = [xi, st.r0, st.s1, st.beta_z1, dz0, dz1, self.T(xi)]
        return write_csv(path, ["xi", "r0", "s1", "beta_z1", "dz0", "dz1", "T"], cols)


def corrected_displacement(pf: PhaseFunctions, setup: PlasmaSetup, x0, Z, correction=None):
    """``dz1(x0, Z) = int_0^{Xi^{-1}(x0 - Z)} gamma0 beta_z1``."""
    fc = correction if correction is not None else FirstCorrection(pf, setup)
    return fc.dz1(x0, Z)


@dataclass(frozen=True)
class ValidityReport:
    Z: float
    xi0: float
    xi: np.ndarray
    T: np.ndarray
    T_max: float
    cond2_lhs: float
    cond2_rhs: float
    threshold: float
    applicable: bool

    @property
    def cond2_ratio(self):
        return self.cond2_lhs / self.cond2_rhs if self.cond2_rhs > 0 else 0.0

    @property
    def T_pass(self):
        return (not self.applicable) or self.T_max <= self.threshold

    @property
    def cond2_pass(self):
        return self.cond2_ratio <= self.threshold

    @property
    def passed(self):
        return self.T_pass and self.cond2_pass


def validity(pf: PhaseFunctions, setup: PlasmaSetup, Z, xi0, threshold=DEFAULT_THRESHOLD,
             correction=None, samples_per_wavelength=64) -> ValidityReport:
    """Evaluate ``max T`` on ``[0, xi0]`` and ``(2 Y3(xi0) + xi0 + 2Z) K lambda / 2 pi`` against ``threshold``."""
    _require_plasma_side(Z)
    fc = correction if correction is not None else FirstCorrection(pf, setup, xi_max=xi0)
    n = max(2, int(math.ceil(samples_per_wavelength * xi0 / pf.wavelength)) + 1)
    xi = np.unique(np.concatenate([np.linspace(0.0, xi0, n), pf.breaks[pf.breaks <= xi0]]))
    applicable = bool(np.any(pf.Y3(xi) > 0))
    T = fc.T(xi) if applicable else np.full(xi.shape, np.nan)
    T_max = float(np.max(T)) if applicable else float("nan")
    lhs = 2.0 * float(pf.Y3(xi0)) + xi0 + 2.0 * float(Z)
    K = setup.K
    rhs = 2.0 * math.pi / (K * pf.wavelength) if K > 0 else math.inf
    return ValidityReport(float(Z), float(xi0), xi, T, T_max, lhs, rhs, threshold, applicable)


@dataclass(frozen=True)
class SlingshotReport:
    zeta: float
    K: float
    gamma_M: float
    H_MeV: float
    xi0: float
    validity: ValidityReport
    geometry: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.validity.passed and all(v for v in self.geometry.values() if isinstance(v, bool))

    def summary(self):
        v = self.validity
        lines = [
            f"xi0          = {self.xi0:.6e} cm",
            f"zeta_e       = {self.zeta:.6e} cm",
            f"K            = {self.K:.6e} cm^-2",
            f"K xi0^2      = {self.K * self.xi0**2:.6g}",
            f"gamma_eM     = {self.gamma_M:.6g}",
            f"H            = {self.H_MeV:.6g} MeV",
            f"T_max        = {v.T_max:.6g} (threshold {v.threshold:g}) {'PASS' if v.T_pass else 'FAIL'}",
            f"cond2 ratio  = {v.cond2_ratio:.6g} (threshold {v.threshold:g}) {'PASS' if v.cond2_pass else 'FAIL'}",
        ]
        for key, val in self.geometry.items():
            lines.append(f"{key:<12} = {val}")
        lines.append(f"validity     = {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def slingshot(pf: PhaseFunctions, setup: PlasmaSetup, xi0, threshold=DEFAULT_THRESHOLD, R=None, l=None,
              correction=None) -> SlingshotReport:
    """Energy ``H = m_e c^2 (1 + 2K zeta^2)`` of surface electrons, ``zeta = Y3(xi0)``.

    ``R`` and ``l`` (pancake radius and length, cm) are optional; when given the
    report flags ``l <= threshold * R`` and ``R >= 2 zeta``.
    """
    rep = validity(pf, setup, 0.0, xi0, threshold, correction)
    if not rep.passed:
        warnings.warn("validity conditions fail; the slingshot estimate is unreliable", RuntimeWarning,
                      stacklevel=2)
    zeta = float(pf.Y3(xi0))
    K = setup.K
    gM = 1.0 + 2.0 * K * zeta**2
    H = CGS.electron_rest_energy * gM / ERG_PER_MEV
    geometry = {}
    if R is not None:
        geometry["R_ge_2zeta"] = bool(R >= 2.0 * zeta)
    if R is not None and l is not None:
        geometry["l_ll_R"] = bool(l <= threshold * R)
    return SlingshotReport(zeta, K, gM, H, float(xi0), rep, geometry)


# -- transverse correction -------------------------------------------------


class _PotentialTables:
    """Exact primitives for the one-dimensional form of the light-cone integral."""

    def __init__(self, pf: PhaseFunctions):
        self.pf = pf
        u = pf._u
        self.W1 = u.refit(lambda x, v: x[:, None] * v, u.degree + 1).antiderivative()
        self.W2 = u.refit(lambda x, v: v * pf.Y3(x)[:, None], 3 * u.degree + 2).antiderivative()

    def W(self, x):
        """``(int_0^x xi u, int_0^x u Y3)`` with exact continuation past the support end."""
        pf = self.pf
        e = pf._end
        end = e["xi"]
        xc = np.clip(x, 0.0, end)
        w1, w2 = self.W1(xc), self.W2(xc)
        d = np.maximum(x - end, 0.0)[..., None]
        w1 = w1 + e["u"] * 0.5 * ((end + d) ** 2 - end**2)
        w2 = w2 + e["u"] * (e["Y3"] * d + 0.5 * e["uz"] * d**2)
        zero = (np.asarray(x) <= 0)[..., None]
        return np.where(zero, 0.0, w1), np.where(zero, 0.0, w2)


def _upper_phase(pf, xi, xim):
    """``min(xi, x*)`` with ``x* + 2 Y3(x*) = xim`` (edge of the plasma inside the light cone)."""
    xim = np.asarray(xim, dtype=float)
    f = lambda x: x + 2.0 * pf.Y3(x)  # noqa: E731
    df = lambda x: 1.0 + 2.0 * pf.u_z(x)  # noqa: E731
    hi = np.maximum(xim, 0.0)
    root = monotone_solve(f, df, hi, 0.0, hi, xtol=1e-16 * max(pf.wavelength, float(np.max(hi, initial=0.0))))
    return np.minimum(xi, np.maximum(root, 0.0))


def _light_cone_2d(pf, xi_hi, xim, order, inner_order=4):
    """Iterated Gauss rule for ``int dxi' int dxi-' theta(Z0) u0(xi') / 2`` at one point.

    The outer rule runs over the phase panels up to ``xi_hi``; along each
    characteristic ``xi' = const`` the inner range ``[-xi', xi-]`` is split at
    the plasma edge and ``theta(Z0)`` is read from the inverse Lagrangian map.
    """
    t, w = gauss_legendre(order)
    pts = pf.breaks[(pf.breaks > 0) & (pf.breaks < xi_hi)]
    edges = np.concatenate([[0.0], pts, [xi_hi]])
    h = 0.5 * np.diff(edges)
    xp = ((0.5 * (edges[:-1] + edges[1:]))[:, None] + h[:, None] * t[None, :]).ravel()
    wp = (h[:, None] * w[None, :]).ravel()
    tq, wq = gauss_legendre(inner_order)
    edge = xp + 2.0 * pf.Y3(xp)
    lo = -xp
    length = np.zeros_like(xp)
    tol = 1e-13 * max(abs(xim), pf.wavelength)
    for a, b, upper in ((lo, np.minimum(edge, xim), False), (np.maximum(edge, lo), np.full_like(xp, xim), True)):
        hh = np.maximum(0.5 * (b - a), 0.0)
        s = 0.5 * (a + b)[:, None] + hh[:, None] * tq[None, :]
        x0p = 0.5 * (s + xp[:, None])
        ev = np.zeros(s.shape + (3,))
        ev[..., 2] = 0.5 * (s - xp[:, None])
        Z0 = position_inverse(pf, x0p, ev)[..., 2]
        # nodes on the edge itself belong to the upper piece
        inside = Z0 >= -tol if upper else Z0 > 0
        length += hh * np.sum(wq * inside, axis=1)
    return 0.5 * np.sum((wp * length)[:, None] * pf.u_perp(xp), axis=0)


@dataclass(frozen=True)
class VectorPotentialCorrection:
    delta_u: np.ndarray
    u0: np.ndarray
    u1: np.ndarray
    A1: np.ndarray
    delta_u_1d: np.ndarray
    error_estimate: np.ndarray

    @property
    def route_difference(self):
        return float(np.max(np.abs(self.delta_u - self.delta_u_1d), initial=0.0))


def corrected_vector_potential(pf: PhaseFunctions, setup: PlasmaSetup, x0, z, rtol=1e-9, check=True):
    """``u1_perp(x0, z)`` and ``A1_perp`` from the light-cone integral.

    Primary route: iterated Gauss quadrature in characteristic coordinates
    (:func:`_light_cone_2d`) at two outer orders; their difference is the error
    estimate. Second route: inner integral done by hand,
    ``-K int_0^xi u0 (xi- - xi' - 2 Y3)_+``, from exact Chebyshev primitives.
    With ``check`` both the estimate and the route difference must stay below
    ``rtol`` times ``max(|u1 - u0|)``.

    Raises
    ------
    NumericalError
        If the error estimate or the route difference exceeds the tolerance.
    """
    x0 = np.asarray(x0, dtype=float)
    z = np.asarray(z, dtype=float)
    x0, z = np.broadcast_arrays(x0, z)
    if np.any(x0 < 0):
        raise ValueError("x0 must be >= 0")
    xi = x0 - z
    xim = x0 + z
    K = setup.K
    u0 = pf.u_perp(xi)
    if K == 0 or pf.is_trivial:
        zeros = np.zeros_like(u0)
        return VectorPotentialCorrection(zeros, u0, u0.copy(), -u0 / pf.species.coupling, zeros.copy(),
                                         np.zeros(xi.shape))
    up = _upper_phase(pf, xi, xim)

    w1, w2 = _PotentialTables(pf).W(up)
    du_1d = -K * (xim[..., None] * pf.Y_perp(up) - w1 - 2.0 * w2)

    du = np.zeros_like(u0)
    err = np.zeros(xi.shape)
    for idx in np.ndindex(xi.shape):
        if up[idx] <= 0:
            continue
        lo_order = -2.0 * K * _light_cone_2d(pf, up[idx], xim[idx], 12)
        du[idx] = -2.0 * K * _light_cone_2d(pf, up[idx], xim[idx], 20)
        err[idx] = np.max(np.abs(du[idx] - lo_order))

    if check:
        scale = max(float(np.max(np.abs(du_1d), initial=0.0)), np.finfo(float).tiny)
        diff = float(np.max(np.abs(du - du_1d), initial=0.0))
        if np.max(err, initial=0.0) > rtol * scale or diff > rtol * scale:
            raise NumericalError(f"light-cone integral: error estimate {np.max(err):.3e}, route difference "
                                 f"{diff:.3e}, scale {scale:.3e}")
    u1 = u0 + du
    return VectorPotentialCorrection(du, u0, u1, -u1 / pf.species.coupling, du_1d, err)
