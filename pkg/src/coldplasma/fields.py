"""Prescribed lab-frame fields: plane waves along any direction and the step-plasma E^z."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CGS

__all__ = ["rotation_z_to", "PlaneWave", "StepPlasmaField"]


def rotation_z_to(n):
    """Proper rotation taking ``e_z`` to the unit vector ``n``.

    Rodrigues rotation about ``e_z x n``; for ``n = -e_z`` (no unique axis) the
    rotation by pi about ``e_x`` is used.
    """
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    c = n[2]
    if c < -1.0 + 1e-15:
        return np.diag([1.0, -1.0, -1.0])
    v = np.array([-n[1], n[0], 0.0])  # e_z x n
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


@dataclass(frozen=True, eq=False)
class PlaneWave:
    """``E(x) = e1 p_x(phi) + e2 p_y(phi)``, ``B = n x E``, ``phi = x0 - n.x``.

    ``profile`` supplies ``e_perp(phi, piece)`` (shape ``(..., 2)``),
    ``breakpoints``, ``wavelength`` and optionally ``a_perp(phi)``; a
    :class:`~coldplasma.pulse.Pulse` qualifies. ``(e1, e2, n)`` is the image of
    ``(e_x, e_y, e_z)`` under :func:`rotation_z_to`.
    """

    profile: object
    direction: tuple = (0.0, 0.0, 1.0)
    _rot: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,) or not np.linalg.norm(d) > 0:
            raise ValueError("wave direction must be a nonzero 3-vector")
        object.__setattr__(self, "_rot", rotation_z_to(d))

    @property
    def n(self):
        return self._rot[:, 2]

    @property
    def basis(self):
        return self._rot[:, 0], self._rot[:, 1]

    @property
    def wavelength(self):
        return self.profile.wavelength

    @property
    def breakpoints(self):
        return np.asarray(self.profile.breakpoints, dtype=float)

    def phase(self, x0, x):
        return np.asarray(x0) - np.asarray(x) @ self.n

    def fields(self, x0, x, piece=None):
        """``(E, B)`` at event ``(x0, x)``; ``piece`` selects a smooth envelope piece."""
        p = self.profile.e_perp(self.phase(x0, x), piece)
        E = p[..., 0:1] * self._rot[:, 0] + p[..., 1:2] * self._rot[:, 1]
        return E, np.cross(self.n, E)

    def a_components(self, phi):
        """Potential components along ``(e1, e2)``, ``-int_0^phi p``."""
        return self.profile.a_perp(phi)


@dataclass(frozen=True)
class StepPlasmaField:
    """Longitudinal field ``4 pi e n0 [z theta(z) - Z theta(Z)]`` of a step plasma.

    Ions are static; ``Z`` is the initial longitudinal position of the electron
    layer that sits at ``z``.
    """

    n0: float

    def __post_init__(self):
        if not self.n0 >= 0:
            raise ValueError(f"density n0 must be nonnegative, got {self.n0}")

    @property
    def K(self):
        return math.pi * CGS.r_e * self.n0

    def E_z(self, z, Z):
        z = np.asarray(z, dtype=float)
        Z = np.asarray(Z, dtype=float)
        return 4.0 * math.pi * CGS.e * self.n0 * (np.maximum(z, 0.0) - np.maximum(Z, 0.0))
