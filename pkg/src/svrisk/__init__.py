"""Stochastic-volatility and EVT tools for one-day Value-at-Risk.

Modules
-------
data      CSV ingestion, returns, train/test split, summary statistics
sv        SV model family and simulation
mcmc      posterior sampling for the SV family and chain diagnostics
garch     GARCH(1,1) with Student-t innovations
evt       peaks over threshold and GPD tails
var       residuals, forecasts and VaR series
backtest  coverage and independence tests
pipeline  fit / forecast / backtest stages used by the CLI
"""
from ._kernels import BACKEND
from .errors import BoundaryError, DataError, NumericalError, SvRiskError

__version__ = "0.1.0"

__all__ = ["BACKEND", "BoundaryError", "DataError", "NumericalError", "SvRiskError", "__version__"]
