"""Piecewise Chebyshev tabulation, exact primitives and monotone inversion.

A :class:`PiecewiseChebyshev` stores one Chebyshev expansion per panel. Fits
are adaptive (panels are bisected until the trailing coefficients fall below
the requested tolerance), primitives are computed exactly in coefficient space,
so nested integrals (field -> potential -> momentum -> displacement) reuse the
same panels and do not accumulate quadrature error.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

__all__ = [
    "NumericalError",
    "QuadratureError",
    "PiecewiseChebyshev",
    "chebyshev_nodes",
    "panel_breaks",
    "monotone_solve",
    "gauss_legendre",
]


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its tolerance."""


class QuadratureError(NumericalError):
    pass


@lru_cache(maxsize=None)
def chebyshev_nodes(degree):
    """First-kind Chebyshev nodes on [-1, 1], ascending."""
    n = degree + 1
    return np.sort(np.cos(np.pi * (np.arange(n) + 0.5) / n))


@lru_cache(maxsize=None)
def _interp_matrix(degree):
    return np.linalg.inv(C.chebvander(chebyshev_nodes(degree), degree))


@lru_cache(maxsize=None)
def gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def panel_breaks(start, end, spacing, breakpoints=()):
    """Panel edges covering [start, end] no wider than ``spacing``, containing every breakpoint."""
    pts = [start, end] + [b for b in breakpoints if start < b < end]
    pts = np.unique(np.asarray(pts, dtype=float))
    edges = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil((b - a) / spacing - 1e-9)))
        edges.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(edges)


def _clenshaw(t, coef):
    # t: (P,), coef: (P, n+1, m) -> (P, m)
    n = coef.shape[1] - 1
    t2 = 2.0 * t[:, None]
    b1 = np.zeros((t.shape[0], coef.shape[2]))
    b2 = np.zeros_like(b1)
    for j in range(n, 0, -1):
        b1, b2 = coef[:, j] + t2 * b1 - b2, b1
    return coef[:, 0] + t[:, None] * b1 - b2


class PiecewiseChebyshev:
    """Vector-valued piecewise Chebyshev expansion.

    Parameters
    ----------
    breaks : (M+1,) array
        Strictly increasing panel edges.
    coef : (M, n+1, m) array
        Chebyshev coefficients per panel and component, in the local variable
        ``t = (2x - a - b) / (b - a)``.

    Evaluation outside ``[breaks[0], breaks[-1]]`` extrapolates the edge
    panels; callers are expected to handle out-of-range arguments themselves.
    """

    def __init__(self, breaks, coef):
        self.breaks = np.asarray(breaks, dtype=float)
        self.coef = np.asarray(coef, dtype=float)
        if self.coef.ndim != 3 or self.coef.shape[0] != self.breaks.size - 1:
            raise ValueError("coef must have shape (panels, degree+1, components)")

    @property
    def degree(self):
        return self.coef.shape[1] - 1

    @property
    def ncomp(self):
        return self.coef.shape[2]

    @classmethod
    def fit(cls, func, breaks, degree, ncomp=1):
        """Interpolate ``func`` (vectorized, returns ``(P,)`` or ``(P, ncomp)``) on every panel."""
        breaks = np.asarray(breaks, dtype=float)
        x = cls._panel_points(breaks, degree)
        vals = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape + (ncomp,))
        coef = np.einsum("jk,pkm->pjm", _interp_matrix(degree), vals)
        return cls(breaks, coef)

    @classmethod
    def fit_adaptive(cls, func, breaks, degree, tol, ncomp=1, max_panels=200_000, scale=None):
        """Like :meth:`fit`, bisecting panels whose trailing coefficients exceed ``tol * scale``.

        ``scale`` defaults to the largest sampled magnitude of ``func``.
        """
        breaks = np.asarray(breaks, dtype=float)
        for _ in range(40):
            pc = cls.fit(func, breaks, degree, ncomp)
            s = scale
            if s is None:
                s = np.max(np.abs(pc.coef[:, 0])) + np.max(np.sum(np.abs(pc.coef[:, 1:]), axis=1))
            tail = np.max(np.abs(pc.coef[:, -2:]), axis=(1, 2))
            bad = tail > tol * max(s, np.finfo(float).tiny)
            if not np.any(bad):
                return pc
            mid = 0.5 * (breaks[:-1][bad] + breaks[1:][bad])
            breaks = np.sort(np.concatenate([breaks, mid]))
            if breaks.size > max_panels:
                break
        raise QuadratureError(
            f"adaptive fit did not converge: {int(np.sum(bad))} panels above tol={tol:g}, "
            f"worst tail {np.max(tail):.3e} vs scale {s:.3e}, {breaks.size - 1} panels"
        )

    @staticmethod
    def _panel_points(breaks, degree):
        a, b = breaks[:-1, None], breaks[1:, None]
        return 0.5 * (a + b) + 0.5 * (b - a) * chebyshev_nodes(degree)[None, :]

    def points(self, degree=None):
        return self._panel_points(self.breaks, self.degree if degree is None else degree)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        idx = np.clip(np.searchsorted(self.breaks, flat, side="right") - 1, 0, self.breaks.size - 2)
        a, b = self.breaks[idx], self.breaks[idx + 1]
        t = (2.0 * flat - a - b) / (b - a)
        out = _clenshaw(t, self.coef[idx])
        if self.ncomp == 1:
            return out[:, 0].reshape(x.shape)
        return out.reshape(x.shape + (self.ncomp,))

    def node_values(self):
        """Values at every panel edge, shape ``(M+1, m)``: left ends plus the final right end."""
        left = np.sum(self.coef * (-1.0) ** np.arange(self.degree + 1)[None, :, None], axis=1)
        right = np.sum(self.coef[-1], axis=0)
        return np.vstack([left, right[None]])

    def antiderivative(self, value_at_start=0.0):
        """Exact primitive, equal to ``value_at_start`` at ``breaks[0]``."""
        half = 0.5 * np.diff(self.breaks)
        coef = C.chebint(self.coef, m=1, lbnd=-1, axis=1) * half[:, None, None]
        increments = np.sum(coef, axis=1)  # value at t=1 of each panel primitive
        offsets = np.cumsum(increments, axis=0) - increments
        coef[:, 0] += offsets + np.asarray(value_at_start, dtype=float)
        return PiecewiseChebyshev(self.breaks, coef)

    def derivative(self):
        half = 0.5 * np.diff(self.breaks)
        coef = C.chebder(self.coef, m=1, axis=1) / half[:, None, None]
        return PiecewiseChebyshev(self.breaks, coef)

    def scaled(self, factor):
        return PiecewiseChebyshev(self.breaks, self.coef * factor)

    def refit(self, func, degree):
        """Re-interpolate ``func(x, self(x))`` on the same panels at ``degree``."""
        x = self.points(degree)
        vals = self(x.ravel())
        if vals.ndim == 1:
            vals = vals[:, None]
        out = np.asarray(func(x.ravel(), vals), dtype=float)
        out = out.reshape(x.shape + (-1,))
        coef = np.einsum("jk,pkm->pjm", _interp_matrix(degree), out)
        return PiecewiseChebyshev(self.breaks, coef)

    def component(self, i):
        return PiecewiseChebyshev(self.breaks, self.coef[:, :, i : i + 1])


def monotone_solve(func, dfunc, target, lo, hi, x0=None, xtol=0.0, rtol=4 * np.finfo(float).eps,
                   maxiter=100):
    """Solve ``func(x) = target`` elementwise for an increasing ``func`` on brackets ``[lo, hi]``.

    Newton steps using ``dfunc``; any step leaving the current bracket is
    replaced by bisection, so convergence is guaranteed whenever the bracket
    is valid.

    Raises
    ------
    NumericalError
        If the iteration does not converge within ``maxiter`` steps.
    """
    target = np.asarray(target, dtype=float)
    lo = np.array(np.broadcast_to(lo, target.shape), dtype=float)
    hi = np.array(np.broadcast_to(hi, target.shape), dtype=float)
    x = 0.5 * (lo + hi) if x0 is None else np.array(np.broadcast_to(x0, target.shape), dtype=float)
    active = np.ones(target.shape, dtype=bool)
    for _ in range(maxiter):
        if not np.any(active):
            return x
        xa = x[active]
        f = func(xa) - target[active]
        df = dfunc(xa)
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(f < 0, xa, lo_a)
        hi_a = np.where(f > 0, xa, hi_a)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = xa - f / df
        outside = ~((xn > lo_a) & (xn < hi_a)) | ~np.isfinite(xn)
        xn = np.where(outside, 0.5 * (lo_a + hi_a), xn)
        xn = np.where(f == 0, xa, xn)
        tol = xtol + rtol * np.maximum(np.abs(xn), np.abs(xa))
        done = (np.abs(xn - xa) <= tol) | (f == 0) | (hi_a - lo_a <= tol)
        x[active] = xn
        lo[active], hi[active] = lo_a, hi_a
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    if np.any(active):
        raise NumericalError(f"monotone_solve: {int(np.sum(active))} points did not converge")
    return x
