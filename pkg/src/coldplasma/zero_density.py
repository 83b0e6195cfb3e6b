"""Exact zero-density motion and its Lagrangian maps.

A particle initially at rest at ``X`` is hit by the wavefront at ``x0 = Z``.
Afterwards everything depends on the phase ``xi = x0 - z`` only::

    z(x0, X)    = x0 - Xi^{-1}(x0 - Z)
    x_perp      = X_perp + Y_perp(x0 - z)
    Z(x0, z)    = z - Y3(x0 - z)
    dz(x0, Z)   = Y3(Xi^{-1}(x0 - Z))
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .io import write_csv
from .kinematics import KinematicState, Species, state_from_s, transverse_momentum
from .phase_functions import PhaseFunctions

__all__ = [
    "Trajectory",
    "state_zero_density",
    "position_forward",
    "position_inverse",
    "displacement",
    "zeta_at_phase",
    "write_trajectory_csv",
    "TRAJECTORY_COLUMNS",
]

TRAJECTORY_COLUMNS = ["x0", "z", "x", "y", "uz", "ux", "uy", "gamma", "s"]


@dataclass(frozen=True)
class Trajectory:
    """Samples ``(x0, position, state)``; ``x`` has shape ``(..., 3)`` ordered ``(x, y, z)``."""

    x0: np.ndarray
    x: np.ndarray
    state: KinematicState

    @property
    def z(self):
        return self.x[..., 2]

    @property
    def x_perp(self):
        return self.x[..., :2]

    def rows(self):
        """Flattened rows in :data:`TRAJECTORY_COLUMNS` order."""
        shape = self.x.shape[:-1]
        st = self.state

        def flat(v):
            return np.broadcast_to(v, shape).ravel()

        cols = [
            flat(self.x0),
            self.x[..., 2].ravel(),
            self.x[..., 0].ravel(),
            self.x[..., 1].ravel(),
            flat(st.u_z),
            flat(st.u_perp[..., 0]),
            flat(st.u_perp[..., 1]),
            flat(st.gamma),
            flat(st.s),
        ]
        return np.column_stack(cols)


def state_zero_density(species: Species, pulse, xi) -> KinematicState:
    """Zero-density state from the directly integrated potential of ``pulse``."""
    u = transverse_momentum(species, pulse.a_perp(xi))
    return state_from_s(u, np.ones(u.shape[:-1]))


def position_forward(pf: PhaseFunctions, x0, X) -> Trajectory:
    """Position and state at time ``x0`` of the particle that started at rest at ``X``.

    ``x0`` and ``X[..., 0]`` broadcast against each other.
    """
    x0 = np.asarray(x0, dtype=float)
    X = np.asarray(X, dtype=float)
    shape = np.broadcast_shapes(x0.shape, X.shape[:-1])
    x0 = np.broadcast_to(x0, shape).ravel()
    X = np.broadcast_to(X, shape + (3,)).reshape(-1, 3)
    xi = pf.xi_inverse(x0 - X[:, 2])
    x = np.empty(X.shape)
    # Z + Y3(xi) equals x0 - xi and cannot round below Z
    x[:, 2] = X[:, 2] + pf.Y3(xi)
    x[:, :2] = X[:, :2] + pf.Y_perp(xi)
    st = pf.state(xi)
    st = KinematicState(st.u_perp.reshape(shape + (2,)), st.u_z.reshape(shape), st.gamma.reshape(shape),
                        st.s.reshape(shape))
    return Trajectory(x0.reshape(shape), x.reshape(shape + (3,)), st)


def position_inverse(pf: PhaseFunctions, x0, x):
    """Initial position ``X`` of the particle found at ``x`` at time ``x0``."""
    x0 = np.asarray(x0, dtype=float)
    x = np.asarray(x, dtype=float)
    shape = np.broadcast_shapes(x0.shape, x.shape[:-1])
    x = np.broadcast_to(x, shape + (3,))
    xi = np.broadcast_to(x0, shape) - x[..., 2]
    X = np.empty(shape + (3,))
    X[..., 2] = x[..., 2] - pf.Y3(xi)
    X[..., :2] = x[..., :2] - pf.Y_perp(xi)
    return X


def displacement(pf: PhaseFunctions, x0, Z):
    """Longitudinal displacement ``Y3(Xi^{-1}(x0 - Z))`` (nonnegative)."""
    eta = np.asarray(x0, dtype=float) - np.asarray(Z, dtype=float)
    return pf.Y3(pf.xi_inverse(eta))


def zeta_at_phase(pf: PhaseFunctions, xi_check):
    """Displacement when phase ``xi_check`` reaches a particle, and the reach-time offset.

    Returns ``(zeta, Xi(xi_check))``: the particle starting at ``Z`` is reached
    at ``x0 = Xi(xi_check) + Z`` and has then moved by ``zeta`` whatever ``Z`` is.
    """
    return pf.Y3(xi_check), pf.Xi(xi_check)


def write_trajectory_csv(path, trajectory: Trajectory, extra=None):
    """Write trajectory rows; ``extra`` maps additional column names to flat arrays."""
    rows = trajectory.rows()
    header = list(TRAJECTORY_COLUMNS)
    cols = [rows[:, i] for i in range(rows.shape[1])]
    for name, values in (extra or {}).items():
        header.append(name)
        cols.append(np.ravel(values))
    return write_csv(path, header, cols)
