"""Particle species and the light-cone (s-variable) parametrization of 4-velocities.

All velocities are dimensionless: ``u = gamma * beta`` and ``s = gamma - u_z``.
Arrays are accepted everywhere; transverse components live on the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CGS

__all__ = [
    "Species",
    "ELECTRON",
    "PROTON",
    "POSITRON",
    "KinematicState",
    "state_from_s",
    "state_from_u",
    "transverse_momentum",
]


@dataclass(frozen=True)
class Species:
    """A charged particle type: rest mass (g) and signed charge (statC)."""

    mass: float
    charge: float
    label: str = ""

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"species {self.label!r}: mass must be positive, got {self.mass}")
        if self.charge == 0:
            raise ValueError(f"species {self.label!r}: a tracked species needs nonzero charge")

    @property
    def coupling(self):
        """q / (m c^2), in 1/statvolt."""
        return self.charge / (self.mass * CGS.c**2)

    @property
    def rest_energy(self):
        return self.mass * CGS.c**2


ELECTRON = Species(CGS.m_e, -CGS.e, "electron")
POSITRON = Species(CGS.m_e, CGS.e, "positron")
PROTON = Species(CGS.m_p, CGS.e, "proton")


@dataclass(frozen=True)
class KinematicState:
    """Relativistic state ``(u_perp, u_z, gamma, s)``.

    ``u_perp`` has shape ``(..., 2)``; the scalar fields broadcast against
    ``u_perp[..., 0]``.
    """

    u_perp: np.ndarray
    u_z: np.ndarray
    gamma: np.ndarray
    s: np.ndarray

    @property
    def beta_perp(self):
        return self.u_perp / np.asarray(self.gamma)[..., None]

    @property
    def beta_z(self):
        return self.u_z / self.gamma

    @property
    def beta(self):
        """Full 3-velocity, shape ``(..., 3)``."""
        return np.concatenate([self.beta_perp, np.asarray(self.beta_z)[..., None]], axis=-1)

    def mass_shell_residual(self):
        """gamma^2 - |u|^2 - 1, relative to gamma^2."""
        u2 = np.sum(self.u_perp**2, axis=-1) + self.u_z**2
        return (self.gamma**2 - u2 - 1.0) / self.gamma**2


def state_from_s(u_perp, s) -> KinematicState:
    """Recover ``u_z``, ``gamma`` and ``beta`` from ``u_perp`` and ``s = gamma - u_z``.

    Raises
    ------
    ValueError
        If any ``s`` is not strictly positive.
    """
    u_perp = np.asarray(u_perp, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise ValueError("s = gamma - u_z must be strictly positive")
    up2 = np.sum(u_perp**2, axis=-1)
    gamma = (1.0 + up2 + s**2) / (2.0 * s)
    u_z = (1.0 + up2 - s**2) / (2.0 * s)
    return KinematicState(u_perp, u_z, gamma, s)


def state_from_u(u_perp, u_z) -> KinematicState:
    u_perp = np.asarray(u_perp, dtype=float)
    u_z = np.asarray(u_z, dtype=float)
    up2 = np.sum(u_perp**2, axis=-1)
    gamma = np.sqrt(1.0 + up2 + u_z**2)
    # gamma - u_z cancels catastrophically for u_z >> 1
    s = np.where(u_z > 0, (1.0 + up2) / (gamma + np.abs(u_z)), gamma - u_z)
    return KinematicState(u_perp, u_z, gamma, s)


def transverse_momentum(species: Species, a_perp):
    """Transverse 4-velocity ``-q a_perp / (m c^2)`` of a particle initially at rest."""
    return -species.coupling * np.asarray(a_perp, dtype=float)
