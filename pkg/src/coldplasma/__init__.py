"""Relativistic cold-plasma response to transverse plane waves.

Exact zero-density motion, ponderomotive forces, arbitrary initial conditions
by frame reduction, first plasma corrections, and an RK4 reference integrator.
"""

__version__ = "0.1.0"
