"""Deformed Ginibre ensembles: samplers, edge kernels and Monte Carlo checks
of finite-N identities."""

__version__ = "0.1.0"

from ._backend import COMPILED  # noqa: E402,F401
