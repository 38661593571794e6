"""Ridge regression with leave-one-out and GCV scoring of the ridge constant.

All fitting happens on centered, scaled data with no intercept: the model is
b = (X'X + kI)^-1 X'y.  Classification recovers the response scale through
the stored standardization parameters and thresholds at a cutoff.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .preprocess import StandardizationParams, log_shift_transform

# |t| at or above this marks a coefficient as significant (two-sided 95%).
T_SIGNIFICANCE = 1.96

# above this condition estimate the normal-equation solve switches from the
# Cholesky factorization to the eigendecomposition path
_CONDITION_LIMIT = 1e12


class Criterion(enum.Enum):
    """Score used to pick the ridge constant."""

    PRESS = "press"
    GCV = "gcv"


def default_k_grid() -> np.ndarray:
    """181 log-spaced ridge constants covering [1e-6, 1e3]."""
    return np.logspace(-6.0, 3.0, 181)


@dataclass
class RidgeSearchConfig:
    """Grid and criterion for select_k."""

    grid: np.ndarray = field(default_factory=default_k_grid)
    criterion: Criterion = Criterion.PRESS

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("grid must be a non-empty 1-d array")
        if np.any(grid < 0.0):
            raise ValueError("grid values must be >= 0")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        self.grid = grid


@dataclass
class RidgeFit:
    """Coefficients and diagnostics of one ridge solve."""

    coefficients: np.ndarray
    ridge_constant: float
    hat_diagonal: np.ndarray
    hat_trace: float
    rss: float
    sigma2_hat: float
    t_ratios: np.ndarray
    standardization: StandardizationParams | None = None


def _check_xy(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("X must be (m, n) and y must be (m,) with matching m")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("X and y must be finite")
    return x, y


def _solve_cholesky(x, y, k):
    n = x.shape[1]
    xtx = x.T @ x
    a = xtx + k * np.eye(n)
    factor = scipy.linalg.cho_factor(a)
    b = scipy.linalg.cho_solve(factor, x.T @ y)
    z = scipy.linalg.cho_solve(factor, x.T)
    h = np.einsum("ij,ji->i", x, z)
    a_inv = scipy.linalg.cho_solve(factor, np.eye(n))
    sandwich_diag = np.einsum("ij,jk,ki->i", a_inv, xtx, a_inv)
    return b, h, sandwich_diag


def _solve_spectral(x, y, k):
    xtx = x.T @ x
    lam, v = np.linalg.eigh(xtx)
    lam = np.maximum(lam, 0.0)
    d = lam + k
    if np.any(d <= 0.0) or (k == 0.0 and lam.min() <= lam.max() * 1e-12):
        raise np.linalg.LinAlgError("singular system at k = 0")
    w = v.T @ (x.T @ y)
    b = v @ (w / d)
    g = x @ v
    h = (g * g) @ (1.0 / d)
    sandwich_diag = (v * v) @ (lam / d**2)
    return b, h, sandwich_diag


def ridge_fit(
    x,
    y,
    k: float,
    standardization: StandardizationParams | None = None,
    solver: str = "auto",
) -> RidgeFit:
    """Solve (X'X + kI) b = X'y and collect hat/residual diagnostics.

    ``solver`` is "auto" (Cholesky with an eigendecomposition fallback for
    ill-conditioned systems), "cholesky", or "spectral".  k = 0 is accepted
    only when X'X is invertible.
    """
    x, y = _check_xy(x, y)
    if k < 0.0:
        raise ValueError(f"ridge constant must be >= 0, got {k}")
    m, n = x.shape

    if solver == "spectral":
        b, h, sandwich = _solve_spectral(x, y, k)
    elif solver == "cholesky":
        try:
            b, h, sandwich = _solve_cholesky(x, y, k)
        except scipy.linalg.LinAlgError:
            raise np.linalg.LinAlgError("singular system at k = 0")
    elif solver == "auto":
        # trace(A)/k bounds the condition number of A from above when k > 0
        ill = k > 0.0 and float(np.einsum("ij,ij->", x, x)) / k > _CONDITION_LIMIT
        if ill:
            b, h, sandwich = _solve_spectral(x, y, k)
        else:
            try:
                b, h, sandwich = _solve_cholesky(x, y, k)
            except scipy.linalg.LinAlgError:
                if k == 0.0:
                    raise np.linalg.LinAlgError("singular system at k = 0")
                b, h, sandwich = _solve_spectral(x, y, k)
    else:
        raise ValueError(f"unknown solver {solver!r}")

    residuals = y - x @ b
    rss = float(residuals @ residuals)
    hat_trace = float(h.sum())
    dof = m - hat_trace
    sigma2 = rss / dof if dof > 0.0 else float("nan")
    with np.errstate(invalid="ignore", divide="ignore"):
        se = np.sqrt(sigma2 * sandwich)
        t = np.where(b == 0.0, 0.0, b / se)
    return RidgeFit(
        coefficients=b,
        ridge_constant=float(k),
        hat_diagonal=h,
        hat_trace=hat_trace,
        rss=rss,
        sigma2_hat=float(sigma2),
        t_ratios=t,
        standardization=standardization,
    )


def press(x, y, k: float) -> float:
    """Leave-one-out squared prediction error via the hat-diagonal shortcut.

    PRESS(k) = sum_i (e_i / (1 - h_ii))^2, identical to literally refitting
    with each row held out.  A leverage of exactly 1 makes the holdout
    residual undefined and raises.
    """
    fit = ridge_fit(x, y, k)
    denom = 1.0 - fit.hat_diagonal
    if np.any(denom <= 0.0):
        raise ValueError("leverage h_ii = 1 encountered; PRESS undefined")
    residuals = y - x @ fit.coefficients
    return float(((residuals / denom) ** 2).sum())


def gcv(x, y, k: float) -> float:
    """Generalized cross validation score m * RSS / (m - trace(H))^2."""
    x, y = _check_xy(x, y)
    fit = ridge_fit(x, y, k)
    m = x.shape[0]
    denom = m - fit.hat_trace
    if denom <= 0.0:
        raise ValueError("trace(H) = m encountered; GCV undefined")
    return float(m * fit.rss / denom**2)


def select_k(x, y, cfg: RidgeSearchConfig) -> tuple[float, np.ndarray]:
    """Evaluate the criterion over the grid and return (best k, curve).

    The whole curve is computed from one eigendecomposition of X'X, which
    matches press()/gcv() to floating-point accuracy.  Grid points where the
    criterion is undefined become NaN; ties go to the smallest k.
    """
    x, y = _check_xy(x, y)
    m = x.shape[0]
    lam, v = np.linalg.eigh(x.T @ x)
    lam = np.maximum(lam, 0.0)
    g = x @ v
    g2 = g * g
    w = v.T @ (x.T @ y)

    curve = np.full(cfg.grid.shape, np.nan)
    for i, k in enumerate(cfg.grid):
        d = lam + k
        if np.any(d <= 0.0):
            continue
        residuals = y - g @ (w / d)
        h = g2 @ (1.0 / d)
        if cfg.criterion is Criterion.PRESS:
            denom = 1.0 - h
            if np.any(denom <= 0.0):
                continue
            curve[i] = ((residuals / denom) ** 2).sum()
        else:
            dof = m - h.sum()
            if dof <= 0.0:
                continue
            curve[i] = m * (residuals @ residuals) / dof**2

    finite = np.flatnonzero(np.isfinite(curve))
    if finite.size == 0:
        raise ValueError("criterion undefined over the entire grid")
    best = finite[np.argmin(curve[finite])]
    return float(cfg.grid[best]), curve


def t_ratios(x, y, fit: RidgeFit) -> np.ndarray:
    """Coefficient t-ratios under the ridge sandwich covariance.

    se_j^2 = sigma2_hat * [(X'X + kI)^-1 X'X (X'X + kI)^-1]_jj with
    sigma2_hat = RSS / (m - trace(H)).  Coefficients that are exactly zero
    get a t-ratio of zero.
    """
    x, y = _check_xy(x, y)
    m = x.shape[0]
    if m - fit.hat_trace <= 0.0:
        raise ValueError("m - trace(H) <= 0; t-ratios undefined")
    refit = ridge_fit(x, y, fit.ridge_constant)
    return refit.t_ratios


def predict_class(fit: RidgeFit, x_raw, cutoff: float = 0.5) -> tuple[int, float]:
    """Classify one raw predictor row with a fitted model.

    The row passes through the shifted log and the fit's standardization
    parameters; the de-standardized score is compared to ``cutoff`` and the
    class is 1 exactly when the score exceeds it.  Returns (class, score).
    """
    if fit.standardization is None:
        raise ValueError("fit carries no standardization parameters")
    if not 0.0 < cutoff < 1.0:
        raise ValueError("cutoff must be in (0, 1)")
    x = np.asarray(x_raw, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != fit.coefficients.shape[0]:
        raise ValueError("row length does not match the fitted predictor count")
    if not np.all(np.isfinite(x)):
        raise ValueError("row must be finite")
    params = fit.standardization
    xs = (log_shift_transform(x) - params.means) / params.sds
    score = params.response_mean + params.response_sd * float(fit.coefficients @ xs)
    return (1 if score > cutoff else 0), score
