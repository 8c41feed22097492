"""A scikit-learn style facade over the star-product pipeline.

``FedosovStarProduct`` keeps the familiar ``fit`` / fitted-attribute
convention: hyper-parameters live in ``__init__`` untouched, ``fit`` consumes
a chart description and stores the solved state in ``state_``.
"""

from __future__ import annotations

from typing import Mapping, Optional, Union

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import Config, config_from_dict, load_config
from .fedosov import ChartData, FedosovState, build_state, extract_Ck, star_multiply, taylor_series
from .scalar_poly import NuSeries, Scalar, parse_series
from .weyl import WeylElement

__all__ = ["FedosovStarProduct"]

ChartLike = Union[ChartData, Config, Mapping, str]


class FedosovStarProduct(BaseEstimator):
    """Fedosov star product on one chart.

    Parameters
    ----------
    cap : int or None
        Total-degree truncation ``N``; ``None`` keeps the chart's own value.
    validate : bool
        Run the chart validation before solving.

    Attributes
    ----------
    chart_ : ChartData
        The chart actually used (with ``cap`` applied).
    state_ : FedosovState
        Solved state holding ``r``.
    order_ : int
        Highest certified nu power of the product, ``N // 2``.

    Examples
    --------
    >>> est = FedosovStarProduct().fit("flat2d")
    >>> str(est.multiply("x1", "x2"))
    'x1*x2 + 1/2*nu'
    """

    def __init__(self, cap: Optional[int] = None, validate: bool = True):
        self.cap = cap
        self.validate = validate

    def _chart_from(self, chart: ChartLike) -> ChartData:
        if isinstance(chart, ChartData):
            return chart
        if isinstance(chart, Config):
            return chart.chart
        if isinstance(chart, Mapping):
            return config_from_dict(chart, validate=self.validate).chart
        if isinstance(chart, str):
            return load_config(chart, validate=self.validate).chart
        raise TypeError(f"cannot build a chart from {type(chart).__name__}")

    def fit(self, chart: ChartLike, y=None) -> "FedosovStarProduct":
        """Solve the Fedosov recursion for ``chart``.

        ``chart`` may be a :class:`ChartData`, a :class:`Config`, a mapping
        following the config schema, or a config path / fixture name.
        """
        if self.cap is not None and (not isinstance(self.cap, int) or self.cap < 2):
            raise ValueError("cap must be an integer >= 2")
        c = self._chart_from(chart)
        if self.cap is not None and self.cap != c.cap:
            c = ChartData(c.pd, c.gamma, dict(c.Omega), c.s, self.cap)
        self.chart_ = c
        self.state_: FedosovState = build_state(c, check=self.validate)
        self.order_ = c.cap // 2
        self.n_features_in_ = c.dim
        return self

    def _series(self, f) -> NuSeries:
        if isinstance(f, str):
            return parse_series(f, self.chart_.dim)
        if isinstance(f, (Scalar, NuSeries)):
            if f.dim != self.chart_.dim:
                raise ValueError(f"expected dimension {self.chart_.dim}, got {f.dim}")
            return NuSeries.of(f)
        raise TypeError("functions must be strings, Scalars or NuSeries")

    def multiply(self, f, g) -> NuSeries:
        """``f * g`` through ``nu^order_``."""
        check_is_fitted(self, "state_")
        return star_multiply(self.state_, self._series(f), self._series(g))

    def taylor(self, f) -> WeylElement:
        """Fedosov-Taylor series of ``f``."""
        check_is_fitted(self, "state_")
        return taylor_series(self.state_, self._series(f))

    def ck(self, k: int, f, g) -> Scalar:
        """Bidifferential coefficient ``C_k(f, g)``."""
        check_is_fitted(self, "state_")
        return extract_Ck(self.state_, k, self._series(f), self._series(g))
