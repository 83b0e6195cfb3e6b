"""CGS-Gaussian physical constants (CODATA 2018, via scipy.constants)."""

from dataclasses import dataclass

import scipy.constants as _sc

__all__ = ["PhysicalConstants", "CGS", "ERG_PER_MEV"]

ERG_PER_MEV = _sc.mega * _sc.electron_volt * 1e7


@dataclass(frozen=True)
class PhysicalConstants:
    """Light speed (cm/s), elementary charge (statC) and particle masses (g)."""

    c: float
    e: float
    m_e: float
    m_p: float

    @property
    def r_e(self):
        """Classical electron radius e^2 / (m_e c^2), in cm."""
        return self.e**2 / (self.m_e * self.c**2)

    @property
    def electron_rest_energy(self):
        """m_e c^2 in erg."""
        return self.m_e * self.c**2

    @property
    def electron_rest_energy_mev(self):
        return self.electron_rest_energy / ERG_PER_MEV


# statC = 10 * c[m/s] * C exactly, since c_cgs = 100 c_SI and 1 C = 0.1 c_cgs statC.
CGS = PhysicalConstants(
    c=_sc.c * 1e2,
    e=_sc.e * _sc.c * 10.0,
    m_e=_sc.m_e * 1e3,
    m_p=_sc.m_p * 1e3,
)
