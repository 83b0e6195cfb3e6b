"""Motion of a test particle with arbitrary initial data in a plane wave.

A boost ``B`` to the initial rest frame, a rotation ``R`` aligning the
(aberrated) propagation direction with ``+z`` and a translation ``T`` moving
the initial event to the origin reduce the problem to a particle at rest at the
origin hit by a wave along ``+z``. The part of the wave that has already passed
the particle at the initial time is irrelevant and is cut away, so the
zero-density solution applies in the reduced frame; the inverse transformation
gives the lab-frame motion.

Under the reduction the lab phase ``phi = x0 - n.x`` becomes
``phi = phi_ev + D * xi_r`` with the Doppler factor ``D = gamma0 (1 - beta0.n)``
and ``phi_ev = -n.x_init``. Along the reduced solution ``s = 1``, which in the
lab reads ``gamma - n.u = D``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import PlaneWave, rotation_z_to
from .kinematics import Species, state_from_u
from .numerics import monotone_solve
from .phase_functions import PhaseFunctions, build
from .zero_density import Trajectory

__all__ = ["boost_matrix", "PoincareTransform", "CutWave", "reduce", "solve_arbitrary_ic", "ReducedSolution"]


def boost_matrix(beta):
    """Lorentz boost to the frame moving with velocity ``beta``, acting on ``(x0, x, y, z)``."""
    beta = np.asarray(beta, dtype=float)
    b2 = float(beta @ beta)
    if not b2 < 1.0:
        raise ValueError(f"|beta| = {np.sqrt(b2):.6g} must be < 1")
    g = 1.0 / np.sqrt(1.0 - b2)
    L = np.eye(4)
    L[0, 0] = g
    L[0, 1:] = L[1:, 0] = -g * beta
    if b2 > 0:
        L[1:, 1:] += (g - 1.0) * np.outer(beta, beta) / b2
    return L


@dataclass(frozen=True)
class PoincareTransform:
    """``x_r = diag(1, R) Lambda(beta0) (x - event)`` on events ``(x0, x, y, z)``."""

    beta0: np.ndarray
    rotation: np.ndarray
    event: np.ndarray

    @property
    def matrix(self):
        rot = np.eye(4)
        rot[1:, 1:] = self.rotation
        return rot @ boost_matrix(self.beta0)

    @property
    def inverse_matrix(self):
        rot = np.eye(4)
        rot[1:, 1:] = self.rotation.T
        return boost_matrix(-np.asarray(self.beta0)) @ rot

    def forward(self, x4):
        return (np.asarray(x4, dtype=float) - self.event) @ self.matrix.T

    def inverse(self, x4_r):
        return np.asarray(x4_r, dtype=float) @ self.inverse_matrix.T + self.event

    def forward_vector(self, v4):
        """Linear part only, for 4-velocities."""
        return np.asarray(v4, dtype=float) @ self.matrix.T

    def inverse_vector(self, v4_r):
        return np.asarray(v4_r, dtype=float) @ self.inverse_matrix.T


@dataclass(frozen=True, eq=False)
class CutWave:
    """Reduced-frame wave along ``+z``: ``e(xi) = M p(phi_ev + D xi) theta(xi)``.

    ``p`` is the lab profile (components along the lab basis ``e1, e2``) and
    ``M`` the constant 2x2 matrix of the field transformation.
    """

    profile: object
    matrix: np.ndarray
    doppler: float
    phase_offset: float

    @property
    def wavelength(self):
        return self.profile.wavelength / self.doppler

    def lab_phase(self, xi):
        return self.phase_offset + self.doppler * np.asarray(xi, dtype=float)

    def reduced_phase(self, phi):
        return (np.asarray(phi, dtype=float) - self.phase_offset) / self.doppler

    @property
    def support(self):
        end = self.profile.support[1]
        return (0.0, max(0.0, float(self.reduced_phase(end))))

    @property
    def breakpoints(self):
        bps = self.reduced_phase(np.asarray(self.profile.breakpoints, dtype=float))
        return np.unique(np.concatenate([[0.0], bps[bps > 0]]))

    @property
    def is_zero(self):
        return bool(getattr(self.profile, "is_zero", False)) or not self.support[1] > 0

    def e_perp(self, xi, piece=None):
        xi = np.asarray(xi, dtype=float)
        p = self.profile.e_perp(self.lab_phase(xi))
        return np.where((xi > 0)[..., None], p @ self.matrix.T, 0.0)


def reduce(wave: PlaneWave, x_init, beta_init):
    """Poincare transformation to the rest frame of the particle and the cut wave there.

    Raises
    ------
    ValueError
        If ``|beta_init| >= 1``.
    """
    beta0 = np.asarray(beta_init, dtype=float)
    x_init = np.asarray(x_init, dtype=float)
    Lb = boost_matrix(beta0)
    n = wave.n
    k_r = Lb @ np.concatenate([[1.0], n])
    doppler = float(k_r[0])
    n_r = k_r[1:] / doppler
    R = rotation_z_to(n_r).T
    event = np.concatenate([[0.0], x_init])
    P = PoincareTransform(beta0, R, event)

    # lab E -> boosted E for a plane wave with B = n x E
    g = Lb[0, 0]
    b2 = float(beta0 @ beta0)
    e1, e2 = wave.basis

    def boosted(E):
        B = np.cross(n, E)
        out = g * (E + np.cross(beta0, B))
        if b2 > 0:
            out -= g**2 / (g + 1.0) * beta0 * (beta0 @ E)
        return R @ out

    cols = np.stack([boosted(e1), boosted(e2)], axis=1)  # 3 x 2
    cut = CutWave(wave.profile, cols[:2], doppler, float(-n @ x_init))
    return P, cut


@dataclass(frozen=True, eq=False)
class ReducedSolution:
    transform: PoincareTransform
    cut: CutWave
    phase_functions: PhaseFunctions

    def lab_events(self, xi):
        """Lab events ``(x0, x, y, z)`` and 4-velocities at reduced phases ``xi``."""
        pf = self.phase_functions
        xi = np.asarray(xi, dtype=float)
        x_r = np.concatenate([pf.Xi(xi)[..., None], pf.Y_perp(xi), pf.Y3(xi)[..., None]], axis=-1)
        st = pf.state(xi)
        u_r = np.concatenate([st.gamma[..., None], st.u_perp, st.u_z[..., None]], axis=-1)
        return self.transform.inverse(x_r), self.transform.inverse_vector(u_r)

    def lab_time(self, xi):
        return self.lab_events(xi)[0][..., 0]

    def lab_gamma(self, xi):
        return self.lab_events(xi)[1][..., 0]

    def phase_at_times(self, times):
        """Reduced phases at which the particle reaches the lab times ``times`` (>= 0).

        ``dx0/dxi = gamma_lab >= 1`` and ``x0(0) = 0``, so ``[0, t]`` always brackets.
        """
        t = np.asarray(times, dtype=float)
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise ValueError("lab times must be finite and >= 0 (the initial event is at x0 = 0)")
        xtol = 1e-16 * max(float(np.max(t, initial=0.0)), self.cut.wavelength)
        return monotone_solve(self.lab_time, self.lab_gamma, t, 0.0, t, x0=0.5 * t, xtol=xtol)


def solve_arbitrary_ic(species: Species, wave: PlaneWave, x_init, beta_init, times, tol=1e-11,
                       return_solution=False):
    """Lab trajectory of a particle starting at ``x_init`` with velocity ``beta_init`` at ``x0 = 0``.

    Returns a :class:`~coldplasma.zero_density.Trajectory` at ``times``
    (lab ``x0``); with ``return_solution`` also the :class:`ReducedSolution`.
    """
    P, cut = reduce(wave, x_init, beta_init)
    times = np.asarray(times, dtype=float)
    t_max = float(np.max(times, initial=0.0))
    end = cut.support[1]
    pf = build(species, cut, xi_max=max(end, t_max, cut.wavelength), tol=tol)
    sol = ReducedSolution(P, cut, pf)
    xi = sol.phase_at_times(times)
    x4, u4 = sol.lab_events(xi)
    traj = Trajectory(x4[..., 0], x4[..., 1:], state_from_u(u4[..., 1:3], u4[..., 3]))
    return (traj, sol) if return_solution else traj
