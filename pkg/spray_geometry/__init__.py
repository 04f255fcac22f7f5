"""Metric nonlinear connections for semisprays, generalized Lagrange metrics and Lagrange spaces"""

__version__ = "0.1.0"
