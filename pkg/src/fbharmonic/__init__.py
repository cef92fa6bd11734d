"""Numerical verification of f-biharmonic curves, surfaces and Riemannian
submersions by grid residuals."""

from .errors import (DomainError, FBHError, FrameError, FrenetDegenerate, IntegrationStalled,
                     NumericsError)
from .numcore import Grid1D, SampledFunction, diff, integrate_ode, quadrature
from .report import FAIL, IMPOSSIBLE, MINIMAL, PASS, ResidualReport
from .spaceform import CHARTS, SpaceFormChart, covariant_derivative, curvature4, get_chart

__version__ = "0.1.0"

__all__ = [
    "DomainError", "FBHError", "FrameError", "FrenetDegenerate", "IntegrationStalled",
    "NumericsError", "Grid1D", "SampledFunction", "diff", "integrate_ode", "quadrature",
    "PASS", "FAIL", "IMPOSSIBLE", "MINIMAL", "ResidualReport", "CHARTS", "SpaceFormChart",
    "covariant_derivative", "curvature4", "get_chart",
]
