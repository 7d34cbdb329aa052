"""Selection of the regularization weight and forecast machinery.

The L1 filters degenerate once the penalty weight exceeds a data-driven
ceiling (``lambda_max``), which anchors every selection rule here:

* ``lambda_max`` / ``segment_lambda``   closed-form order-of-magnitude choices
* ``fit_scaling_exponent``              empirical growth law of the ceiling
  with window length (about T^{5/2} for the trend filter and T^{3/2} for
  the level filter on random-walk input)
* ``cv_filter``                         rolling-window cross-validation over a
  geometric grid bracketing the per-window ceilings
* ``predict_two_trend``                 switch between a short-horizon and a
  long-horizon trend based on how far the data sits from the long one
* ``hp_lambda_for_window`` and friends  spectral matching of the quadratic
  filter to a moving average of a given width
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .banded import band_solve, diff_operator, gram_banded
from .errors import InsufficientHistoryError
from .filters import FilterResult, l1_filter
from .series import as_values
from .synth import default_params, simulate_model2

__all__ = [
    "CVConfig",
    "CVReport",
    "TwoTrendPrediction",
    "lambda_max",
    "segment_lambda",
    "fit_scaling_exponent",
    "cv_filter",
    "forecast_trend",
    "global_cv_config",
    "predict_two_trend",
    "hp_lambda_for_window",
    "spectral_density",
    "calibrate_l2_spectral",
    "SPECTRAL_RATIO",
]

# Fitted least-squares constant relating the spectral-matched quadratic
# penalty to the closed-form width match 0.5 * (T / 2pi)^4.
SPECTRAL_RATIO = 10.27


@dataclass(frozen=True)
class CVConfig:
    """Window geometry for rolling cross-validation.

    T1 is the training width, T2 the test/forecast width, T3 the
    long-horizon test width of the two-trend predictor (defaults to
    4 * T2). m test windows feed the grid bounds; p training folds score
    each grid point; the grid has n_grid geometric points.
    """

    T1: int = 400
    T2: int = 50
    T3: Optional[int] = None
    m: int = 12
    p: int = 12
    n_grid: int = 15
    order: int = 2

    def __post_init__(self):
        if self.T3 is None:
            object.__setattr__(self, "T3", 4 * self.T2)
        if not self.T1 > self.T2 >= 1:
            raise ValueError(f"need T1 > T2 >= 1, got T1={self.T1}, T2={self.T2}")
        if self.n_grid < 2:
            raise ValueError(f"grid needs at least 2 points, got {self.n_grid}")
        if self.m < 1 or self.p < 1:
            raise ValueError("m and p must be at least 1")
        if self.order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {self.order}")


@dataclass(frozen=True)
class CVReport:
    """Grid, per-grid-point total errors, and the winning weight."""

    grid: np.ndarray
    errors: np.ndarray
    lambda_star: float
    fold_errors: np.ndarray  # shape (n_grid, p)
    lambda_mean: float
    lambda_std: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.errors)) or np.any(self.errors < 0):
            raise ValueError("forecast errors must be finite and non-negative")
        if self.lambda_star not in self.grid:
            raise ValueError("the selected weight must come from the grid")


@dataclass(frozen=True)
class TwoTrendPrediction:
    """Chosen trend path plus both candidates and the switch statistics."""

    prediction: np.ndarray
    branch: str  # "local" or "global"
    local_trend: np.ndarray
    global_trend: np.ndarray
    lambda_local: float
    lambda_global: float
    sigma: float
    deviation: float


def lambda_max(y, order: int) -> float:
    """Smallest penalty weight at which the L1 filter fully degenerates.

    Equals the max-norm of (D D')^{-1} D y; above it the order-2 fit is
    the least-squares line and the order-1 fit is the mean.
    """
    values = as_values(y)
    op = diff_operator(order, len(values))
    z = band_solve(gram_banded(op), op.apply(values))
    return float(np.max(np.abs(z)))


def segment_lambda(y, p: int, order: int) -> float:
    """Mean of per-segment ceilings over p equal contiguous segments.

    Dividing the sample shortens the windows, which shrinks the ceilings
    and therefore resolves shorter trends.
    """
    values = as_values(y)
    if p < 1:
        raise ValueError(f"segment count must be positive, got {p}")
    n = len(values)
    base = n // p
    if base < order + 1:
        raise InsufficientHistoryError(
            f"{p} segments of a {n}-sample series are too short for order {order}"
        )
    bounds = [i * base for i in range(p)] + [n]
    return float(np.mean([
        lambda_max(values[bounds[i]:bounds[i + 1]], order) for i in range(p)
    ]))


def fit_scaling_exponent(
    order: int,
    n_sims: int = 100,
    lengths=(250, 500, 1000, 2000),
    seed: int = 0,
    p: float = 0.993,
    b: float = 5.0,
    sigma: float = 15.0,
) -> float:
    """Log-log slope of the mean degeneracy ceiling against window length.

    Simulates drifting random walks (the model-2 process) at each length
    and regresses log mean(lambda_max) on log length. Pure Brownian
    input (b = 0) gives 1.5 for order 1 and 2.5 for order 2.
    """
    lengths = list(lengths)
    if len(lengths) < 3:
        raise ValueError("need at least 3 window lengths")
    if n_sims < 30:
        raise ValueError("need at least 30 simulations per length")
    seed_rng = np.random.default_rng(seed)
    child_seeds = seed_rng.integers(0, 2**63, size=(len(lengths), n_sims))
    means = []
    for i, length in enumerate(lengths):
        vals = []
        for j in range(n_sims):
            params = default_params(
                2, n=int(length), p=p, b=b, sigma=sigma, seed=int(child_seeds[i, j])
            )
            vals.append(lambda_max(simulate_model2(params), order))
        means.append(np.mean(vals))
    slope = np.polyfit(np.log(lengths), np.log(means), 1)[0]
    return float(slope)


def forecast_trend(result: FilterResult, order: int, horizon: int) -> np.ndarray:
    """Extrapolate a fitted trend: continue the last slope (order 2) or
    carry the last level (order 1)."""
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    x = result.trend
    if order == 2:
        slope = x[-1] - x[-2]
        return x[-1] + slope * np.arange(1, horizon + 1)
    if order == 1:
        return np.full(horizon, x[-1])
    raise ValueError(f"order must be 1 or 2, got {order}")


def _grid_bounds(lam_mean: float, lam_std: float):
    """Geometric-grid endpoints mean +/- 2 std, clamped to stay positive."""
    lo = lam_mean - 2.0 * lam_std
    hi = lam_mean + 2.0 * lam_std
    if lo <= 0.0:
        lo = max(1e-6 * lam_mean, np.finfo(float).eps)
    if hi <= lo:
        hi = 10.0 * lo
    return lo, hi


def cv_filter(y, cfg: CVConfig) -> CVReport:
    """Rolling cross-validation of the L1 penalty weight.

    The m most recent non-overlapping test windows give per-window
    ceilings whose mean and spread bound a geometric grid; each grid
    point is scored by filtering p rolling training windows and
    measuring the squared forecast error over the adjacent test window.
    """
    values = as_values(y)
    n = len(values)
    need = max(cfg.m * cfg.T2, cfg.T1 + cfg.p * cfg.T2)
    if n < need:
        raise InsufficientHistoryError(
            f"cross-validation needs {need} samples "
            f"(m={cfg.m}, p={cfg.p}, T1={cfg.T1}, T2={cfg.T2}), got {n}"
        )

    ceilings = []
    for i in range(cfg.m):
        start = n - (cfg.m - i) * cfg.T2
        ceilings.append(lambda_max(values[start:start + cfg.T2], cfg.order))
    lam_mean = float(np.mean(ceilings))
    lam_std = float(np.std(ceilings, ddof=1)) if cfg.m > 1 else 0.0
    lo, hi = _grid_bounds(lam_mean, lam_std)
    j = np.arange(1, cfg.n_grid + 1)
    grid = lo * (hi / lo) ** (j / cfg.n_grid)

    fold_errors = np.zeros((cfg.n_grid, cfg.p))
    for k in range(cfg.p):
        test_start = n - (cfg.p - k) * cfg.T2
        train_start = test_start - cfg.T1
        train = values[train_start:test_start]
        test = values[test_start:test_start + cfg.T2]
        for jj, lam in enumerate(grid):
            fitted = l1_filter(train, lam, order=cfg.order)
            forecast = forecast_trend(fitted, cfg.order, len(test))
            fold_errors[jj, k] = float(np.mean((forecast - test) ** 2))

    errors = fold_errors.sum(axis=1)
    best = int(np.argmin(errors))
    return CVReport(
        grid=grid,
        errors=errors,
        lambda_star=float(grid[best]),
        fold_errors=fold_errors,
        lambda_mean=lam_mean,
        lambda_std=lam_std,
    )


def global_cv_config(cfg: CVConfig) -> CVConfig:
    """Cross-validation geometry for the long horizon: test width T3,
    training width 4 * T3 (the same training-to-test proportion the
    short horizon uses)."""
    return CVConfig(
        T1=4 * cfg.T3, T2=cfg.T3, m=cfg.m, p=cfg.p,
        n_grid=cfg.n_grid, order=cfg.order,
    )


def predict_two_trend(y, cfg: CVConfig) -> TwoTrendPrediction:
    """Trend prediction switching between a short and a long horizon.

    Both horizons are cross-validated independently (test width T2 for
    the local trend, T3 for the global one) and each trend is fitted
    over a trailing window of its own training width. If the last
    observation sits within one standard deviation of the global trend
    the local trend is used, otherwise the signal is considered
    stretched and the global trend wins.
    """
    values = as_values(y)
    local_report = cv_filter(values, cfg)
    global_cfg = global_cv_config(cfg)
    global_report = cv_filter(values, global_cfg)

    local_window = values[-cfg.T1:]
    global_window = values[-global_cfg.T1:]
    local_fit = l1_filter(local_window, local_report.lambda_star, order=cfg.order)
    global_fit = l1_filter(global_window, global_report.lambda_star, order=cfg.order)

    residuals = global_window - global_fit.trend
    sigma = float(np.std(residuals, ddof=1))
    deviation = float(abs(global_window[-1] - global_fit.trend[-1]))
    branch = "local" if deviation < sigma else "global"
    prediction = local_fit.trend if branch == "local" else global_fit.trend
    return TwoTrendPrediction(
        prediction=prediction,
        branch=branch,
        local_trend=local_fit.trend,
        global_trend=global_fit.trend,
        lambda_local=local_report.lambda_star,
        lambda_global=global_report.lambda_star,
        sigma=sigma,
        deviation=deviation,
    )


def hp_lambda_for_window(T: float) -> float:
    """Quadratic-filter weight matched to a width-T moving average."""
    if T < 2:
        raise ValueError(f"window must be at least 2, got {T}")
    return SPECTRAL_RATIO * 0.5 * (T / (2.0 * np.pi)) ** 4


def spectral_density(kind: str, omega, T: Optional[int] = None,
                     lam: Optional[float] = None):
    """Transfer-function power of the moving-average or quadratic filter.

    ``kind="ma"`` needs the window T: |sum_t exp(-i w t)|^2 / T^2.
    ``kind="hp"`` needs the weight lam: (1 + 4 lam (3 - 4 cos w + cos 2w))^-2.
    Both equal 1 at zero frequency.
    """
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    if kind == "ma":
        if T is None or T < 1:
            raise ValueError("moving-average density needs a window T >= 1")
        phases = np.exp(-1j * np.outer(omega_arr, np.arange(T)))
        out = (np.abs(phases.sum(axis=1)) / T) ** 2
    elif kind == "hp":
        if lam is None or lam < 0:
            raise ValueError("quadratic-filter density needs lam >= 0")
        out = (1.0 + 4.0 * lam * (3.0 - 4.0 * np.cos(omega_arr)
                                  + np.cos(2.0 * omega_arr))) ** -2.0
    else:
        raise ValueError(f"kind must be 'ma' or 'hp', got {kind!r}")
    return float(out[0]) if np.ndim(omega) == 0 else out


def calibrate_l2_spectral(T: int, n_freq: Optional[int] = None) -> float:
    """Least-squares spectral match of the quadratic filter to a width-T
    moving average; the result tracks hp_lambda_for_window within a few
    percent."""
    if T < 4:
        raise ValueError(f"window must be at least 4, got {T}")
    if n_freq is None:
        n_freq = max(1024, 8 * T)  # resolve the 2*pi/T main lobe
    omega = np.pi * np.arange(n_freq + 1) / n_freq
    target = spectral_density("ma", omega, T=T)
    reference = 0.5 * (T / (2.0 * np.pi)) ** 4

    def objective(log_lam):
        return float(np.sum(
            (spectral_density("hp", omega, lam=np.exp(log_lam)) - target) ** 2
        ))

    result = minimize_scalar(
        objective,
        bounds=(np.log(reference * 0.05), np.log(reference * 2000.0)),
        method="bounded",
        options={"xatol": 1e-10},
    )
    if not result.success:
        raise RuntimeError(f"spectral calibration failed: {result.message}")
    return float(np.exp(result.x))
