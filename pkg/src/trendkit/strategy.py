"""Walk-forward momentum strategy driven by a trend estimator.

Each day the engine estimates the drift of log prices with the chosen
trend model (moving average, quadratic filter, or one of the L1-filter
variants with daily cross-validated penalty weights), estimates the
variance as the trailing mean of squared log returns, allocates the
mean-variance fraction clipped to the configured bounds, and compounds
wealth with the realized price move. No estimate ever uses data past
the decision date, so truncating the inputs reproduces the allocation
path exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .calibration import (
    CVConfig,
    cv_filter,
    global_cv_config,
    hp_lambda_for_window,
    predict_two_trend,
)
from .errors import DataError, InsufficientHistoryError, NumericalError
from .filters import hp_filter, l1_filter
from .series import Series, as_values

__all__ = [
    "StrategyConfig",
    "PerformanceStats",
    "BacktestReport",
    "TREND_MODELS",
    "moving_average_trend",
    "realized_vol",
    "optimal_allocation",
    "step_wealth",
    "run_backtest",
    "performance_stats",
]

TREND_MODELS = ("ma", "hp", "l1-local", "l1-global", "l1-two-trend")

TRADING_DAYS_PER_YEAR = 260
VARIANCE_FLOOR = 1e-10


@dataclass(frozen=True)
class StrategyConfig:
    """Allocation rule parameters and trend-model windows.

    ``risk_aversion`` is the product of the utility curvature and the
    initial budget; it only ever enters the allocation through that
    product. The windows follow the half-year convention: a 130-day
    test horizon (T2), a 520-day long horizon (T3 = 4 T2), and training
    windows four times the test width.
    """

    trend_model: str = "l1-global"
    risk_aversion: float = 1.0
    alpha_min: float = -1.0
    alpha_max: float = 1.0
    vol_window: int = 130
    T1: int = 520
    T2: int = 130
    T3: int = 520
    cv_m: int = 3
    cv_p: int = 3
    n_grid: int = 15
    ma_window: Optional[int] = None   # defaults to T3
    hp_lambda: Optional[float] = None  # defaults to the spectral match at T3
    hp_window: Optional[int] = None   # defaults to T3

    def __post_init__(self):
        if self.trend_model not in TREND_MODELS:
            raise ValueError(
                f"trend_model must be one of {TREND_MODELS}, got {self.trend_model!r}"
            )
        if self.alpha_min > self.alpha_max:
            raise ValueError("alpha_min must not exceed alpha_max")
        if self.vol_window < 2:
            raise ValueError(f"vol_window must be at least 2, got {self.vol_window}")
        if self.ma_window is None:
            object.__setattr__(self, "ma_window", self.T3)
        if self.hp_window is None:
            object.__setattr__(self, "hp_window", self.T3)
        if self.hp_lambda is None:
            object.__setattr__(self, "hp_lambda", hp_lambda_for_window(self.hp_window))

    def cv_config(self) -> CVConfig:
        return CVConfig(
            T1=self.T1, T2=self.T2, T3=self.T3,
            m=self.cv_m, p=self.cv_p, n_grid=self.n_grid, order=2,
        )


@dataclass(frozen=True)
class PerformanceStats:
    performance_pct: float
    volatility_pct: float
    sharpe: float
    information_ratio: Optional[float]
    max_drawdown_pct: float


@dataclass(frozen=True)
class BacktestReport:
    wealth: Series
    allocations: Series
    stats: PerformanceStats
    start_index: int
    config: StrategyConfig
    failures: list = field(default_factory=list)
    floored_variance_dates: list = field(default_factory=list)


def _log_prices(prices) -> np.ndarray:
    values = as_values(prices)
    if np.any(values <= 0):
        bad = int(np.flatnonzero(values <= 0)[0])
        raise DataError(f"non-positive price at position {bad}")
    return np.log(values)


def moving_average_trend(prices, T: int) -> np.ndarray:
    """Per-date drift estimate: one-step slope of the trailing width-T
    moving average of log prices.

    Entry t is the change of the average between t-1 and t, defined for
    t >= T; earlier entries are NaN. On exact exponential growth at
    rate g every defined entry equals g; with T = 1 it is the latest
    log return.
    """
    log_p = _log_prices(prices)
    n = len(log_p)
    if T < 1:
        raise ValueError(f"window must be at least 1, got {T}")
    if n < T + 1:
        raise InsufficientHistoryError(
            f"moving-average slope needs {T + 1} samples, got {n}"
        )
    # per-window means (not a cumsum difference) so identical windows give
    # bitwise-equal averages and constant prices produce exactly zero drift
    ma = np.lib.stride_tricks.sliding_window_view(log_p, T).mean(axis=1)
    out = np.full(n, np.nan)
    out[T:] = ma[1:] - ma[:-1]
    return out


def realized_vol(prices, T: int) -> np.ndarray:
    """Trailing uncentered variance of log returns.

    Entry t averages the squared log returns over (t-T, t], defined for
    t >= T; earlier entries are NaN.
    """
    log_p = _log_prices(prices)
    n = len(log_p)
    if T < 1:
        raise ValueError(f"window must be at least 1, got {T}")
    if n < T + 1:
        raise InsufficientHistoryError(
            f"volatility over {T} returns needs {T + 1} samples, got {n}"
        )
    sq = np.diff(log_p) ** 2
    csum = np.concatenate([[0.0], np.cumsum(sq)])
    out = np.full(n, np.nan)
    out[T:] = (csum[T:] - csum[:-T]) / T
    return out


def optimal_allocation(mu: float, sigma2: float, cfg: StrategyConfig) -> float:
    """Mean-variance allocation mu / (risk_aversion * sigma2), clipped."""
    if sigma2 <= 0:
        raise ValueError(f"variance must be positive, got {sigma2}")
    raw = mu / (cfg.risk_aversion * sigma2)
    return float(np.clip(raw, cfg.alpha_min, cfg.alpha_max))


def step_wealth(W: float, alpha: float, price_ratio: float, r: float) -> float:
    """One-period wealth update W * (1 + alpha*(ratio - 1) + (1 - alpha)*r)."""
    if W <= 0:
        raise ValueError(f"wealth must be positive, got {W}")
    return W + W * (alpha * (price_ratio - 1.0) + (1.0 - alpha) * r)


def _last_slope(trend: np.ndarray) -> float:
    return float(trend[-1] - trend[-2])


def _make_mu_estimator(cfg: StrategyConfig, log_p: np.ndarray):
    """Returns (estimate(t) -> mu, first usable index).

    Every estimator sees only log prices up to and including t.
    """
    n = len(log_p)
    cv = cfg.cv_config()

    if cfg.trend_model == "ma":
        mu_path = moving_average_trend(np.exp(log_p), cfg.ma_window)

        def estimate(t):
            return mu_path[t]

        return estimate, cfg.ma_window

    if cfg.trend_model == "hp":
        window = cfg.hp_window

        def estimate(t):
            fit = hp_filter(log_p[t - window + 1:t + 1], cfg.hp_lambda, order=2)
            return _last_slope(fit.trend)

        return estimate, window - 1

    if cfg.trend_model == "l1-local":
        need = max(cv.m * cv.T2, cv.T1 + cv.p * cv.T2)

        def estimate(t):
            hist = log_p[:t + 1]
            report = cv_filter(hist, cv)
            fit = l1_filter(hist[-cv.T1:], report.lambda_star, order=2)
            return _last_slope(fit.trend)

        return estimate, need - 1

    if cfg.trend_model == "l1-global":
        gcv = global_cv_config(cv)
        need = max(gcv.m * gcv.T2, gcv.T1 + gcv.p * gcv.T2)

        def estimate(t):
            hist = log_p[:t + 1]
            report = cv_filter(hist, gcv)
            fit = l1_filter(hist[-gcv.T1:], report.lambda_star, order=2)
            return _last_slope(fit.trend)

        return estimate, need - 1

    # l1-two-trend
    gcv = global_cv_config(cv)
    need = max(cv.m * cv.T2, cv.T1 + cv.p * cv.T2,
               gcv.m * gcv.T2, gcv.T1 + gcv.p * gcv.T2)

    def estimate(t):
        prediction = predict_two_trend(log_p[:t + 1], cv)
        return _last_slope(prediction.prediction)

    return estimate, need - 1


def run_backtest(prices, rates: Union[float, Series] = 0.0,
                 cfg: StrategyConfig = StrategyConfig()) -> BacktestReport:
    """Daily walk-forward backtest of the momentum rule.

    At each date: estimate the drift from past data only, estimate the
    variance over the trailing window, allocate, then realize the next
    price move. Dates where the trend estimation fails keep the
    previous allocation; dates with floored variance are flagged.
    """
    if not isinstance(prices, Series):
        prices = Series.from_values(as_values(prices), name="price")
    values = prices.values
    n = len(values)
    log_p = _log_prices(values)

    if isinstance(rates, Series):
        if len(rates) != n:
            raise DataError(
                f"rates series length {len(rates)} does not match prices {n}"
            )
        rate_at = rates.values
        mean_rate = float(np.mean(rates.values))
    else:
        rate_at = np.full(n, float(rates))
        mean_rate = float(rates)

    estimate_mu, first_mu = _make_mu_estimator(cfg, log_p)
    t0 = max(first_mu, cfg.vol_window)
    if t0 >= n - 1:
        raise InsufficientHistoryError(
            f"model {cfg.trend_model!r} needs at least {t0 + 2} samples, got {n}"
        )

    variance = realized_vol(values, cfg.vol_window)
    wealth = np.empty(n)
    wealth[t0] = 1.0
    alphas = np.empty(n)
    prev_alpha = 0.0
    failures = []
    floored = []

    for t in range(t0, n):
        try:
            mu = estimate_mu(t)
            sigma2 = variance[t]
            if sigma2 < VARIANCE_FLOOR:
                sigma2 = VARIANCE_FLOOR
                floored.append(t)
            alpha = optimal_allocation(mu, sigma2, cfg)
        except NumericalError:
            failures.append(t)
            alpha = prev_alpha
        alphas[t] = alpha
        prev_alpha = alpha
        if t < n - 1:
            wealth[t + 1] = step_wealth(
                wealth[t], alpha, values[t + 1] / values[t], rate_at[t]
            )

    wealth_series = Series(prices.times[t0:], wealth[t0:], name="wealth")
    alloc_series = Series(prices.times[t0:], alphas[t0:], name="alpha")
    benchmark = Series(prices.times[t0:], values[t0:], name="benchmark")
    stats = performance_stats(wealth_series, benchmark=benchmark, rate=mean_rate)
    return BacktestReport(
        wealth=wealth_series,
        allocations=alloc_series,
        stats=stats,
        start_index=t0,
        config=cfg,
        failures=failures,
        floored_variance_dates=floored,
    )


def performance_stats(wealth, benchmark=None, rate: float = 0.0) -> PerformanceStats:
    """Annualized return/volatility, Sharpe, information ratio, max drawdown.

    Annualization uses 260 trading days. The information ratio compares
    per-period log returns against the benchmark's and is 0 by
    convention when the excess-return series is identically zero.
    """
    w = as_values(wealth)
    if len(w) < 2:
        raise ValueError("wealth path needs at least 2 samples")
    if np.any(w <= 0):
        raise ValueError("wealth must stay positive")

    periods = len(w) - 1
    years = periods / TRADING_DAYS_PER_YEAR
    ann_return = (w[-1] / w[0]) ** (1.0 / years) - 1.0
    log_rets = np.diff(np.log(w))
    ann_vol = float(np.std(log_rets, ddof=1)) * np.sqrt(TRADING_DAYS_PER_YEAR)
    ann_rf = (1.0 + rate) ** TRADING_DAYS_PER_YEAR - 1.0
    sharpe = (ann_return - ann_rf) / ann_vol if ann_vol > 0 else 0.0

    information_ratio = None
    if benchmark is not None:
        b = as_values(benchmark)
        if len(b) != len(w):
            raise ValueError("benchmark length must match the wealth path")
        excess = log_rets - np.diff(np.log(b))
        spread = float(np.std(excess, ddof=1))
        if spread == 0.0:
            information_ratio = 0.0
        else:
            information_ratio = float(
                np.mean(excess) * np.sqrt(TRADING_DAYS_PER_YEAR) / spread
            )

    peak = np.maximum.accumulate(w)
    max_dd = float(np.max(1.0 - w / peak)) * 100.0

    return PerformanceStats(
        performance_pct=float(ann_return) * 100.0,
        volatility_pct=ann_vol * 100.0,
        sharpe=float(sharpe),
        information_ratio=information_ratio,
        max_drawdown_pct=max_dd,
    )
