"""Tabulated phase primitives of the zero-density motion.

For a species driven by a wave ``e_perp(xi)`` (vanishing for ``xi <= 0``)::

    a_perp = -int_0^xi e_perp          u_perp = -q a_perp / (m c^2)
    u_z    = |u_perp|^2 / 2            gamma  = 1 + u_z
    Y_perp = int_0^xi u_perp           Y3     = int_0^xi u_z
    Xi     = xi + Y3                   V3     = int_0^xi Y3

All of them are held as piecewise Chebyshev expansions on one panel set, so
every primitive is exact up to the accuracy of the field fit. Past the end of
the wave support the integrands are constant and the primitives are continued
exactly (linearly, or quadratically for ``V3``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import write_csv
from .kinematics import KinematicState, Species, state_from_s
from .numerics import NumericalError, PiecewiseChebyshev, monotone_solve, panel_breaks

__all__ = ["PhaseFunctions", "build", "xi_inverse"]

FIELD_DEGREE = 16


@dataclass(frozen=True, eq=False)
class PhaseFunctions:
    """Immutable tables for one species and one wave; see :func:`build`."""

    species: Species
    wavelength: float
    xi_max: float
    tol: float
    breaks: np.ndarray
    _a: PiecewiseChebyshev | None
    _u: PiecewiseChebyshev | None
    _Yp: PiecewiseChebyshev | None
    _uz: PiecewiseChebyshev | None
    _Y3: PiecewiseChebyshev | None
    _V3: PiecewiseChebyshev | None
    _end: dict

    @property
    def grid(self):
        return self.breaks

    @property
    def is_trivial(self):
        return self._a is None

    @property
    def support_end(self):
        return self._end["xi"]

    def _eval(self, name, xi, tail):
        """Evaluate table ``name``; zero for xi <= 0, ``tail(dxi)`` past the support end."""
        xi = np.asarray(xi, dtype=float)
        table = getattr(self, name)
        ncomp = 2 if name in ("_a", "_u", "_Yp") else 1
        shape = xi.shape + ((2,) if ncomp == 2 else ())
        out = np.zeros(shape)
        if table is None:
            return out
        end = self._end["xi"]
        mid = (xi > 0) & (xi <= end)
        post = xi > end
        if np.any(mid):
            out[mid] = table(xi[mid])
        if np.any(post):
            out[post] = tail(xi[post] - end)
        return out

    def a_perp(self, xi):
        return self._eval("_a", xi, lambda d: np.broadcast_to(self._end["a"], d.shape + (2,)))

    def u_perp(self, xi):
        return self._eval("_u", xi, lambda d: np.broadcast_to(self._end["u"], d.shape + (2,)))

    def u_z(self, xi):
        return self._eval("_uz", xi, lambda d: np.full(d.shape, self._end["uz"]))

    def gamma(self, xi):
        return 1.0 + self.u_z(xi)

    def Y_perp(self, xi):
        e = self._end
        return self._eval("_Yp", xi, lambda d: e["Yp"] + d[:, None] * e["u"])

    def Y3(self, xi):
        e = self._end
        return self._eval("_Y3", xi, lambda d: e["Y3"] + e["uz"] * d)

    def V3(self, xi):
        e = self._end
        return self._eval("_V3", xi, lambda d: e["V3"] + e["Y3"] * d + 0.5 * e["uz"] * d**2)

    def Xi(self, xi):
        xi = np.asarray(xi, dtype=float)
        return xi + self.Y3(xi)

    def state(self, xi) -> KinematicState:
        """Zero-density state at phase ``xi`` (``s = 1`` exactly)."""
        u = self.u_perp(xi)
        return state_from_s(u, np.ones(u.shape[:-1]))

    def xi_inverse(self, eta):
        return xi_inverse(self, eta)

    def write_csv(self, path, xi=None):
        """Dump ``xi,Y3,Xi,V3`` on ``xi`` (default: the panel grid up to ``xi_max``)."""
        if xi is None:
            xi = np.unique(np.concatenate([self.breaks, [self.xi_max]]))
            xi = xi[xi <= self.xi_max]
        xi = np.asarray(xi, dtype=float)
        return write_csv(path, ["xi", "Y3", "Xi", "V3"], [xi, self.Y3(xi), self.Xi(xi), self.V3(xi)])


def build(species: Species, wave, xi_max=None, tol=1e-10, spacing=None) -> PhaseFunctions:
    """Tabulate the phase primitives of ``species`` in ``wave``.

    Parameters
    ----------
    wave
        Any object with ``e_perp(xi)`` (vectorized, shape ``(..., 2)``),
        ``wavelength``, ``support`` and ``breakpoints``; a :class:`~coldplasma.pulse.Pulse`
        or a cut wave from :mod:`coldplasma.poincare`.
    xi_max : float, optional
        Nominal range for dumps; must not precede the support end.
    tol : float
        Relative tolerance on the trailing Chebyshev coefficients of the field fit.
    spacing : float, optional
        Initial panel width, default ``wavelength / 32``.
    """
    lam = wave.wavelength
    start, end = wave.support
    end = max(end, 0.0)
    if xi_max is None:
        xi_max = end + lam
    if xi_max < end:
        raise ValueError(f"xi_max={xi_max:g} precedes the end of the wave support {end:g}")
    spacing = lam / 32 if spacing is None else spacing

    if not end > 0 or _is_zero_wave(wave):
        zero = dict(xi=max(end, 0.0), a=np.zeros(2), u=np.zeros(2), uz=0.0, Yp=np.zeros(2), Y3=0.0, V3=0.0)
        return PhaseFunctions(species, lam, xi_max, tol, np.array([0.0, max(end, lam)]),
                              None, None, None, None, None, None, zero)

    bps = [b for b in np.asarray(wave.breakpoints, dtype=float) if 0 < b < end]
    breaks = panel_breaks(0.0, end, spacing, bps)
    e_fit = PiecewiseChebyshev.fit_adaptive(wave.e_perp, breaks, FIELD_DEGREE, tol, ncomp=2)
    a = e_fit.antiderivative().scaled(-1.0)
    u = a.scaled(-species.coupling)
    Yp = u.antiderivative()
    # |u|^2/2 of a degree-(n+1) expansion is a polynomial of degree 2n+2: refit is exact
    uz = u.refit(lambda x, v: 0.5 * np.sum(v**2, axis=1), 2 * u.degree)
    Y3 = uz.antiderivative()
    V3 = Y3.antiderivative()

    def last(pc):
        return pc.node_values()[-1]

    tail = dict(
        xi=float(end), a=last(a), u=last(u), uz=float(last(uz)[0]), Yp=last(Yp),
        Y3=float(last(Y3)[0]), V3=float(last(V3)[0]),
    )
    pf = PhaseFunctions(species, lam, float(xi_max), tol, e_fit.breaks, a, u, Yp, uz, Y3, V3, tail)
    _check_monotone(pf)
    return pf


def _is_zero_wave(wave):
    env = getattr(wave, "envelope", None)
    if env is not None:
        return env.peak == 0
    return bool(getattr(wave, "is_zero", False))


def _check_monotone(pf):
    xi = pf.breaks
    y3 = pf.Y3(xi)
    scale = max(abs(y3[-1]), np.finfo(float).tiny)
    if np.any(np.diff(y3) < -1e-13 * scale):
        raise NumericalError("tabulated Y3 is not nondecreasing; field fit is inaccurate")


def xi_inverse(pf: PhaseFunctions, eta):
    """Inverse of the strictly increasing map ``Xi``.

    Identity for ``eta <= 0``; exact linear continuation past the support end;
    safeguarded Newton (derivative ``gamma``) on the bracketing panel otherwise.
    """
    eta = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise ValueError("xi_inverse: non-finite phase")
    out = eta.copy()
    if pf.is_trivial:
        return out
    end = pf.support_end
    xi_end = end + pf._end["Y3"]
    post = eta > xi_end
    out[post] = end + (eta[post] - xi_end) / (1.0 + pf._end["uz"])
    mid = (eta > 0) & ~post
    if np.any(mid):
        nodes = pf.breaks
        xnodes = pf.Xi(nodes)
        em = eta[mid]
        i = np.clip(np.searchsorted(xnodes, em, side="left") - 1, 0, nodes.size - 2)
        lo, hi = nodes[i], nodes[i + 1]
        guess = lo + (hi - lo) * (em - xnodes[i]) / (xnodes[i + 1] - xnodes[i])
        out[mid] = monotone_solve(pf.Xi, pf.gamma, em, lo, hi, x0=guess,
                                  xtol=1e-17 * max(end, pf.wavelength))
    return out
