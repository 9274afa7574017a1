"""Randomized algorithms and concentration diagnostics for high-dimensional data.

Submodules: ``linalg`` (eigen/SVD, norms, PSD order), ``ensembles`` (random
vectors, Orlicz norms), ``bounds`` (tail bounds and audits), ``jl``
(random projections), ``networks`` (stochastic block model), ``estimation``
(covariance), ``completion`` (matrix completion), ``geometry`` (Gaussian
width, matrix deviation), ``recovery`` (basis pursuit), ``experiments``
and ``cli`` (seeded experiment harness).
"""

from .ensembles import RngStream

__all__ = ["RngStream"]
__version__ = "0.1.0"
