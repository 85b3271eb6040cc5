"""Trapped-ion spin-orbit simulator: bounded and continuum SO Hamiltonians,
unitary and Lindblad dynamics, closed-form trajectories and spectral analysis."""

__version__ = "0.1.0"
