"""Longitudinal magnetic force of the wave and its cycle average.

With ``mu = lambda^2 q^2 / (8 pi^2 gamma m c^2) = q^2 / (2 k^2 gamma m c^2)`` the
longitudinal magnetic force on a particle at phase ``xi`` is::

    F_m = q^2 (a_perp^2)' / (2 gamma m c^2)

and its average over one period is ``mu * eps * eps'`` (linear polarization)
or ``2 mu * eps * eps'`` (circular). ``gamma`` is always the zero-density
Lorentz factor at the same phase.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .io import write_csv
from .kinematics import Species
from .numerics import gauss_legendre
from .phase_functions import PhaseFunctions
from .pulse import Pulse, slowness

__all__ = [
    "ForceProfile",
    "mu",
    "magnetic_force",
    "ponderomotive_force",
    "cycle_average",
    "force_profile",
    "density_ratio",
    "SLOWNESS_WARN",
]

SLOWNESS_WARN = 0.3


@lru_cache(maxsize=32)
def _delta(pulse):
    return slowness(pulse).delta


def mu(species: Species, pulse: Pulse, pf: PhaseFunctions, xi):
    """Prefactor ``lambda^2 q^2 / (8 pi^2 gamma m c^2)`` with the zero-density gamma at ``xi``."""
    return species.charge * species.coupling / (2.0 * pulse.k**2 * pf.gamma(xi))


def magnetic_force(species: Species, pulse: Pulse, pf: PhaseFunctions, xi, form="envelope"):
    """Instantaneous longitudinal magnetic force (dyn) at phase ``xi``.

    ``form="envelope"`` uses the slowly-varying potential ``-(eps/k) e_p``,
    giving ``mu * [2 eps eps' |e_p|^2 + 2 k eps^2 e_p.e_o]``, which equals the
    cycle average identically for circular polarization. ``form="exact"``
    uses the integrated potential: ``-q^2 a.e / (gamma m c^2)``.
    """
    xi = np.asarray(xi, dtype=float)
    if form == "envelope":
        env = pulse.envelope
        eps, deps = env(xi), env.derivative(xi)
        ep, eo = pulse.e_p(xi), pulse.e_o(xi)
        bracket = 2.0 * eps * deps * np.sum(ep**2, axis=-1) + 2.0 * pulse.k * eps**2 * np.sum(ep * eo, axis=-1)
        return mu(species, pulse, pf, xi) * bracket
    if form == "exact":
        a = pf.a_perp(xi)
        e = pulse.e_perp(xi)
        return -species.charge * species.coupling * np.sum(a * e, axis=-1) / pf.gamma(xi)
    raise ValueError(f"unknown force form {form!r}")


def ponderomotive_force(species: Species, pulse: Pulse, pf: PhaseFunctions, xi, check_slowness=True):
    """Cycle-averaged force: ``mu (eps^2)'`` for circular, half of it for linear polarization."""
    if check_slowness and not pulse.is_zero:
        d = _delta(pulse)
        if d > SLOWNESS_WARN:
            warnings.warn(f"envelope slowness delta={d:.3g} exceeds {SLOWNESS_WARN}; "
                          "the cycle average is not accurate", RuntimeWarning, stacklevel=2)
    xi = np.asarray(xi, dtype=float)
    env = pulse.envelope
    d_eps2 = 2.0 * env(xi) * env.derivative(xi)
    factor = 1.0 if pulse.polarization == "circular" else 0.5
    return factor * mu(species, pulse, pf, xi) * d_eps2


def cycle_average(func, xi, period, passes=2, panels=4, order=16):
    """Moving average of ``func`` over one ``period``, applied ``passes`` times.

    A single centered window of width ``period`` turns the derivative of
    ``eps^2 sin^2(k xi)`` into ``(eps^2)' sin^2(k xi)``, which still oscillates at
    full amplitude; the second pass (a triangular kernel of width ``2 period``)
    removes the residual harmonic down to O(delta).
    """
    if passes not in (1, 2):
        raise ValueError("passes must be 1 (boxcar) or 2 (triangular kernel)")
    xi = np.asarray(xi, dtype=float)
    t, w = gauss_legendre(order)
    half = passes * period / 2
    # the kernel is smooth on each half, so panels split at 0
    edges = np.linspace(-half, half, 2 * panels + 1)
    h = 0.5 * np.diff(edges)
    offs = ((0.5 * (edges[:-1] + edges[1:]))[:, None] + h[:, None] * t[None, :]).ravel()
    wts = (h[:, None] * w[None, :]).ravel() / period
    if passes == 2:
        wts = wts * (1.0 - np.abs(offs) / period)
    return np.sum(func(xi[..., None] + offs) * wts, axis=-1)


@dataclass(frozen=True)
class ForceProfile:
    xi: np.ndarray
    F_m: np.ndarray
    F_p: np.ndarray
    mu: np.ndarray

    def write_csv(self, path):
        return write_csv(path, ["xi", "Fm", "Fp"], [self.xi, self.F_m, self.F_p])


def force_profile(species, pulse, pf, xi, form="envelope") -> ForceProfile:
    xi = np.asarray(xi, dtype=float)
    return ForceProfile(
        xi,
        magnetic_force(species, pulse, pf, xi, form),
        ponderomotive_force(species, pulse, pf, xi),
        mu(species, pulse, pf, xi),
    )


def density_ratio(pf: PhaseFunctions, xi):
    """``n / n0 = gamma`` of the zero-density flow inside the plasma (bunching diagnostic)."""
    return pf.gamma(xi)
