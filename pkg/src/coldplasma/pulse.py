"""Free transverse plane travelling-waves ``E_perp(x0, z) = e_perp(x0 - z)``.

The field is ``e_perp(xi) = eps(xi) * e_o(xi)`` with a real envelope ``eps``
and the polarization vector ``e_o`` (``(cos k xi, 0)`` for linear,
``(cos k xi, sin k xi)`` for circular). Every envelope vanishes for ``xi <= 0``.

Envelopes are piecewise smooth. Their ``breakpoints`` mark the phases where
``eps`` or one of its derivatives may jump; ``piece`` arguments select the
smooth formula valid on one interval between breakpoints, extended beyond it,
which lets integrators land exactly on a jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from .constants import CGS
from .numerics import QuadratureError, gauss_legendre, panel_breaks

__all__ = [
    "Envelope",
    "GaussianEnvelope",
    "PolynomialEnvelope",
    "ConstantEnvelope",
    "TabulatedEnvelope",
    "Pulse",
    "SlownessReport",
    "slowness",
    "read_tabulated_envelope",
    "peak_field_for_w",
]

# relative level at which the gaussian is truncated
GAUSSIAN_CUTOFF = 1e-12


class Envelope:
    """Base class: subclasses define ``support``, ``breakpoints`` and ``_piece_value``."""

    peak: float
    support: tuple

    @property
    def breakpoints(self):
        return np.array(self.support, dtype=float)

    def piece_of(self, xi):
        """Index of the smooth piece containing ``xi``.

        Pieces are left-open intervals ``(b[i-1], b[i]]``; piece 0 ends at the first breakpoint.
        """
        return np.searchsorted(self.breakpoints, xi, side="left")

    def __call__(self, xi, piece=None):
        xi = np.asarray(xi, dtype=float)
        if piece is None:
            piece = self.piece_of(xi)
        return self._piece_value(xi, np.asarray(piece))

    def derivative(self, xi, piece=None):
        xi = np.asarray(xi, dtype=float)
        if piece is None:
            piece = self.piece_of(xi)
        return self._piece_derivative(xi, np.asarray(piece))

    def _inside(self, piece):
        return piece == 1

    def _piece_value(self, xi, piece):
        raise NotImplementedError

    def _piece_derivative(self, xi, piece):
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianEnvelope(Envelope):
    """``peak * exp(-(xi - center)^2 / width^2)``, truncated below 1e-12 of the peak.

    The truncated support must start at ``xi >= 0``; ``center`` defaults to the
    half-width of the support, placing the leading edge exactly at the wavefront.
    """

    peak: float
    width: float
    center: float | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("gaussian width must be positive")
        half = self.half_support
        if self.center is None:
            object.__setattr__(self, "center", half)
        elif self.center - half < -1e-12 * half:
            raise ValueError(
                f"gaussian centered at {self.center:g} cm has truncated support starting at "
                f"{self.center - half:g} < 0; center must be >= {half:g}"
            )

    @property
    def half_support(self):
        return self.width * math.sqrt(math.log(1.0 / GAUSSIAN_CUTOFF))

    @property
    def support(self):
        h = self.half_support
        return (max(self.center - h, 0.0), self.center + h)

    def _piece_value(self, xi, piece):
        g = self.peak * np.exp(-((xi - self.center) / self.width) ** 2)
        return np.where(self._inside(piece), g, 0.0)

    def _piece_derivative(self, xi, piece):
        g = self.peak * np.exp(-((xi - self.center) / self.width) ** 2)
        return np.where(self._inside(piece), -2.0 * (xi - self.center) / self.width**2 * g, 0.0)


@dataclass(frozen=True)
class PolynomialEnvelope(Envelope):
    """C^1 compact bump ``peak * 16 xi^2 (L - xi)^2 / L^4`` on [0, L]; maximum at L/2."""

    peak: float
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("polynomial envelope length must be positive")

    @property
    def support(self):
        return (0.0, self.length)

    def _piece_value(self, xi, piece):
        L = self.length
        p = 16.0 * self.peak * xi**2 * (L - xi) ** 2 / L**4
        return np.where(self._inside(piece), p, 0.0)

    def _piece_derivative(self, xi, piece):
        L = self.length
        d = 32.0 * self.peak * xi * (L - xi) * (L - 2.0 * xi) / L**4
        return np.where(self._inside(piece), d, 0.0)


@dataclass(frozen=True)
class ConstantEnvelope(Envelope):
    """``peak`` on (0, L], zero elsewhere; jumps at both ends."""

    peak: float
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError("constant window length must be positive")

    @property
    def support(self):
        return (0.0, self.length)

    def _piece_value(self, xi, piece):
        return np.where(self._inside(piece), self.peak + 0.0 * xi, 0.0)

    def _piece_derivative(self, xi, piece):
        return np.zeros_like(xi)


@dataclass(frozen=True, eq=False)
class TabulatedEnvelope(Envelope):
    """Linear interpolation of user samples; forced to zero for ``xi <= 0``."""

    xi: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if xi.ndim != 1 or xi.shape != v.shape or xi.size < 2:
            raise ValueError("tabulated envelope needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(xi) <= 0):
            raise ValueError("tabulated envelope abscissae must be strictly increasing")
        if np.any(v < 0):
            raise ValueError("tabulated envelope values must be nonnegative")
        keep = xi >= 0
        xi, v = xi[keep], v[keep]
        if xi.size == 0 or xi[0] > 0:
            xi = np.concatenate([[0.0], xi])
            v = np.concatenate([[0.0], v])
        v = v.copy()
        v[0] = 0.0
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "values", v)

    @property
    def peak(self):
        return float(np.max(self.values))

    @property
    def support(self):
        return (0.0, float(self.xi[-1]))

    @property
    def breakpoints(self):
        return self.xi

    def _segment(self, piece):
        j = np.clip(piece - 1, 0, self.xi.size - 2)
        x0, x1 = self.xi[j], self.xi[j + 1]
        y0, y1 = self.values[j], self.values[j + 1]
        slope = (y1 - y0) / (x1 - x0)
        return x0, y0, slope

    def _piece_value(self, xi, piece):
        x0, y0, slope = self._segment(piece)
        inside = (piece >= 1) & (piece <= self.xi.size - 1)
        return np.where(inside, y0 + slope * (xi - x0), 0.0)

    def _piece_derivative(self, xi, piece):
        _, _, slope = self._segment(piece)
        inside = (piece >= 1) & (piece <= self.xi.size - 1)
        return np.where(inside, slope + 0.0 * xi, 0.0)


def read_tabulated_envelope(path) -> TabulatedEnvelope:
    """Read a two-column text file (header ``# xi epsilon``; xi in cm, eps in statvolt/cm)."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].lstrip().startswith("#"):
        raise ValueError(f"{path}: expected header line '# xi epsilon'")
    header = text[0].lstrip("# \t").split()
    if header[:2] != ["xi", "epsilon"]:
        raise ValueError(f"{path}: expected header '# xi epsilon', got {text[0]!r}")
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected exactly two columns, got {data.shape[1]}")
    return TabulatedEnvelope(data[:, 0], data[:, 1])


def peak_field_for_w(w, wavelength):
    """Envelope peak (statvolt/cm) giving dimensionless electron amplitude ``w``."""
    k = 2.0 * math.pi / wavelength
    return w * k * CGS.m_e * CGS.c**2 / CGS.e


@dataclass(frozen=True)
class SlownessReport:
    delta: float
    xi0: float


@dataclass(frozen=True)
class Pulse:
    """Transverse plane wave travelling along +z.

    Parameters
    ----------
    envelope : Envelope
    wavelength : float
        Carrier wavelength in cm.
    polarization : {"linear", "circular"}
    """

    envelope: Envelope
    wavelength: float
    polarization: str = "linear"
    quad_rtol: float = field(default=1e-12, compare=False)

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if self.polarization not in ("linear", "circular"):
            raise ValueError(f"unknown polarization {self.polarization!r}")

    @property
    def k(self):
        return 2.0 * math.pi / self.wavelength

    @property
    def support(self):
        return self.envelope.support

    @property
    def breakpoints(self):
        return np.asarray(self.envelope.breakpoints, dtype=float)

    @property
    def is_zero(self):
        return self.envelope.peak == 0

    def e_o(self, xi):
        kx = self.k * np.asarray(xi, dtype=float)
        if self.polarization == "linear":
            return np.stack([np.cos(kx), np.zeros_like(kx)], axis=-1)
        return np.stack([np.cos(kx), np.sin(kx)], axis=-1)

    def e_p(self, xi):
        """``-(1/k) e_o'``; unit modulus for circular polarization."""
        kx = self.k * np.asarray(xi, dtype=float)
        if self.polarization == "linear":
            return np.stack([np.sin(kx), np.zeros_like(kx)], axis=-1)
        return np.stack([np.sin(kx), -np.cos(kx)], axis=-1)

    def e_perp(self, xi, piece=None):
        """Transverse electric field (statvolt/cm) at phase ``xi``; shape ``(..., 2)``."""
        xi = np.asarray(xi, dtype=float)
        return self.envelope(xi, piece)[..., None] * self.e_o(xi)

    def dimensionless_amplitude(self, xi):
        """``w = e eps / (k m_e c^2)``."""
        return CGS.e * self.envelope(xi) / (self.k * CGS.m_e * CGS.c**2)

    def a_perp_envelope(self, xi):
        """Slowly-varying-envelope potential ``-(eps/k) e_p``, accurate to O(delta).

        The sign follows ``E_perp = -d/dx0 A_perp``; it agrees with :meth:`a_perp`
        up to O(delta).
        """
        xi = np.asarray(xi, dtype=float)
        return -(self.envelope(xi) / self.k)[..., None] * self.e_p(xi)

    @cached_property
    def _a_nodes(self):
        start, end = self.support
        if self.is_zero or not end > start:
            return np.array([0.0, 1.0]), np.zeros((2, 2))
        nodes = panel_breaks(0.0, end, self.wavelength / 32, self.breakpoints)
        incr = np.zeros((nodes.size - 1, 2))
        for i, (a, b) in enumerate(zip(nodes[:-1], nodes[1:])):
            piece = self.envelope.piece_of(0.5 * (a + b))
            for c in range(2):
                val, err, info = integrate.quad(
                    lambda x: self.e_perp(x, piece)[c], a, b,
                    epsabs=0.0, epsrel=self.quad_rtol, limit=100, full_output=1,
                )[:3]
                scale = abs(self.envelope.peak) * (b - a)
                if err > max(10 * self.quad_rtol * abs(val), 1e-14 * scale):
                    raise QuadratureError(
                        f"a_perp panel [{a:.6g}, {b:.6g}] component {c}: "
                        f"estimate {val:.6e} error {err:.2e} ({info.get('last', '?')} subintervals)"
                    )
                incr[i, c] = val
        cum = np.vstack([np.zeros((1, 2)), np.cumsum(incr, axis=0)])
        return nodes, -cum

    def a_perp(self, xi):
        """Vector potential ``-int_0^xi e_perp`` (statvolt), by Gauss-Kronrod panel quadrature.

        Panel integrals are cached; the partial panel up to ``xi`` uses a
        32-point Gauss-Legendre rule (the integrand is smooth inside a panel).
        """
        xi = np.asarray(xi, dtype=float)
        nodes, a_nodes = self._a_nodes
        flat = np.clip(xi.ravel(), 0.0, nodes[-1])
        i = np.clip(np.searchsorted(nodes, flat, side="right") - 1, 0, nodes.size - 2)
        left = nodes[i]
        t, wts = gauss_legendre(32)
        half = 0.5 * (flat - left)
        pts = left[:, None] + half[:, None] * (t[None, :] + 1.0)
        piece = self.envelope.piece_of(0.5 * (nodes[i] + nodes[i + 1]))
        vals = self.e_perp(pts, piece[:, None])
        partial = np.einsum("pq,pqc->pc", half[:, None] * wts[None, :], vals)
        out = a_nodes[i] - partial
        out[xi.ravel() <= 0] = 0.0
        return out.reshape(xi.shape + (2,))


def slowness(pulse: Pulse) -> SlownessReport:
    """Envelope slowness ``delta = sup lambda |eps'/eps|`` and first-maximum phase ``xi0``.

    ``delta`` is sampled on a lambda/64 grid over the interior of the support
    (envelope edges excluded, one-sided values at interior breakpoints).
    ``xi0`` is the first local maximizer of ``eps``, refined by golden-section
    search to lambda * 1e-6.
    """
    env = pulse.envelope
    start, end = env.support
    lam = pulse.wavelength
    if not end > start or env.peak == 0:
        raise ValueError("pulse envelope has empty support")
    grid = panel_breaks(start, end, lam / 64, env.breakpoints)
    interior = grid[1:-1]
    if interior.size == 0:
        interior = np.array([0.5 * (start + end)])
    eps = env(interior)
    deps = env.derivative(interior)
    ok = eps > 0
    delta = float(np.max(lam * np.abs(deps[ok] / eps[ok]))) if np.any(ok) else 0.0

    vals = env(grid)
    i = _first_local_max(vals)
    x0 = grid[i]
    if 0 < i < grid.size - 1:
        piece = env.piece_of(x0)
        xs = np.array([grid[i - 1], 0.5 * (grid[i - 1] + x0), x0, 0.5 * (x0 + grid[i + 1]), grid[i + 1]])
        fs = env(xs, piece)
        j = 1 + int(np.argmax(fs[1:4]))
        # a plateau (constant window) has no interior maximizer to refine
        if fs[j] > fs[j - 1] and fs[j] > fs[j + 1]:
            res = optimize.minimize_scalar(
                lambda x: -float(env(x, piece)), bracket=(xs[j - 1], xs[j], xs[j + 1]),
                method="golden", options={"xtol": 1e-6 * lam / max(abs(xs[j]), lam)},
            )
            x0 = float(res.x) if -res.fun >= fs[j] else xs[j]
    return SlownessReport(delta=delta, xi0=float(x0))


def _first_local_max(vals):
    n = vals.size
    for i in range(1, n):
        if vals[i] > vals[i - 1] and (i == n - 1 or vals[i] >= vals[i + 1]):
            return i
    return int(np.argmax(vals))
