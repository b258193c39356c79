"""Fractional heat kernels, alpha-stable simulation, linear fractional
(B)SPDE solvers, and a Zakai-filter optimal-control stack on a periodic
1-D grid."""

__version__ = "0.1.0"
