"""Semi-discrete last passage percolation toolkit.

Exact LPP over piecewise-linear line environments, Pitman sorting
operators and their monoid action, Busemann-function estimators with
stabilization detection, the KPZ scaling map to directed-landscape
approximants, and a Monte Carlo verification harness.
"""

__version__ = "0.1.0"
