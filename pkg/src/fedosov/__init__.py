"""Exact Fedosov star products on a polynomial chart.

The package builds the Fedosov connection for a constant symplectic form,
a torsion-free symplectic connection and a formal series of closed two-forms,
then derives the star product, its nu-Euler derivations, the characteristic
form data and the symmetry constructions.  All arithmetic is exact over the
Gaussian rationals.
"""

from .config import Config, ConfigError, load_config
from .estimator import FedosovStarProduct
from .fedosov import (
    ChartData,
    FedosovState,
    ValidationReport,
    build_state,
    extract_Ck,
    star_multiply,
    taylor_series,
    validate_chart,
)
from .scalar_poly import GaussianRational, NuSeries, ParseError, Scalar, parse_scalar, parse_series
from .weyl import WeylElement, format_weyl, parse_weyl

__version__ = "0.1.0"

__all__ = [
    "ChartData",
    "Config",
    "ConfigError",
    "FedosovStarProduct",
    "FedosovState",
    "GaussianRational",
    "NuSeries",
    "ParseError",
    "Scalar",
    "ValidationReport",
    "WeylElement",
    "build_state",
    "extract_Ck",
    "format_weyl",
    "load_config",
    "parse_scalar",
    "parse_series",
    "parse_weyl",
    "star_multiply",
    "taylor_series",
    "validate_chart",
]
