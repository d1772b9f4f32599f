"""Regression estimators evaluated inside each replication.

Everything here is a pure function of numpy arrays: simple and weighted
least squares, logistic regression via iteratively reweighted least
squares (IRLS), the ratio (Wald) instrumental-variable estimate, and
the inverse-probability-weighting pipeline with weight trimming.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDesign,
    ExtremeWeights,
    NonConvergence,
    SeparationDetected,
    ZeroDenominator,
)
from .model import Cohort, SampleIndex, expit

IRLS_MAX_ITER = 50
IRLS_TOL = 1e-8
SEPARATION_COEF_BOUND = 30.0
EXTREME_WEIGHT_RATIO = 1e4


@dataclass(frozen=True)
class EstimateResult:
    """Point estimate, standard error and z-statistic from one fit."""

    beta_hat: float
    se: float
    z: float
    n_used: int


@dataclass(frozen=True)
class LogisticFit:
    coef: np.ndarray
    se: np.ndarray
    iterations: int

    def slope_result(self, n_used: int) -> EstimateResult:
        """The non-intercept coefficient of an (intercept, predictor) fit."""
        return _result(float(self.coef[1]), float(self.se[1]), n_used)


def _z_stat(beta: float, se: float) -> float:
    if se > 0.0:
        return beta / se
    if beta == 0.0:
        return math.nan
    return math.copysign(math.inf, beta)


def _result(beta: float, se: float, n: int) -> EstimateResult:
    return EstimateResult(beta_hat=beta, se=se, z=_z_stat(beta, se), n_used=n)


def _as_float_vector(name: str, v) -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


def ols_simple(predictor, response) -> EstimateResult:
    """Slope of response on predictor with the classical homoskedastic SE.

    beta_hat = cov(pred, resp) / var(pred); the residual variance uses
    the n-2 denominator. Raises DegenerateDesign when the predictor has
    no variation (or fewer than 3 points leave no residual df).
    """
    x = _as_float_vector("predictor", predictor)
    y = _as_float_vector("response", response)
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("predictor and response lengths differ")
    if n < 3:
        raise DegenerateDesign(f"need at least 3 observations, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    if sxx == 0.0:
        raise DegenerateDesign("predictor has zero variance")
    beta = (xc @ yc) / sxx
    resid = yc - beta * xc
    rss = resid @ resid
    se = math.sqrt(max(0.0, rss) / (n - 2) / sxx)
    return _result(float(beta), se, n)


def ols_weighted(predictor, response, weights) -> EstimateResult:
    """Weighted least-squares slope with the classical model-based SE.

    This is the analytic-weights variance (as in weighted ``lm`` fits):
    sigma2_w = sum(w e^2)/(n-2) and var(slope) = sigma2_w / sum(w xc^2).
    With heavy inverse-probability weights it understates the true
    sampling variability — deliberately so: that anti-conservativeness
    is part of the behaviour under study. With all weights equal the
    result coincides with ols_simple.
    """
    x = _as_float_vector("predictor", predictor)
    y = _as_float_vector("response", response)
    w = _as_float_vector("weights", weights)
    n = x.shape[0]
    if y.shape[0] != n or w.shape[0] != n:
        raise ValueError("predictor, response and weights lengths differ")
    if n < 3:
        raise DegenerateDesign(f"need at least 3 observations, got {n}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise ValueError("weights must be positive and finite")

    sw = w.sum()
    x_bar = (w @ x) / sw
    y_bar = (w @ y) / sw
    xc = x - x_bar
    wxc = w * xc
    sxx = wxc @ xc
    if sxx == 0.0:
        raise DegenerateDesign("predictor has zero weighted variance")
    beta = (wxc @ (y - y_bar)) / sxx
    e = (y - y_bar) - beta * xc
    s2 = ((w * e) @ e) / (n - 2)
    se = math.sqrt(max(0.0, s2) / sxx)
    return _result(float(beta), se, n)


def _irls_two_column(x: np.ndarray, y: np.ndarray, max_iter: int, tol: float):
    """IRLS specialized to the (intercept, x) design used in the hot path."""
    b0 = 0.0
    b1 = 0.0
    for iteration in range(1, max_iter + 1):
        p = expit(b0 + b1 * x)
        wt = p * (1.0 - p)
        r = y - p
        g0 = r.sum()
        g1 = r @ x
        t = wt * x
        s00 = wt.sum()
        s01 = t.sum()
        s11 = t @ x
        det = s00 * s11 - s01 * s01
        if det <= 0.0 or not math.isfinite(det):
            raise DegenerateDesign("singular information matrix in logistic fit")
        d0 = (s11 * g0 - s01 * g1) / det
        d1 = (s00 * g1 - s01 * g0) / det
        b0 += d0
        b1 += d1
        if abs(b0) > SEPARATION_COEF_BOUND or abs(b1) > SEPARATION_COEF_BOUND:
            raise SeparationDetected(
                f"coefficient magnitude exceeded {SEPARATION_COEF_BOUND:g} during IRLS"
            )
        if max(abs(d0), abs(d1)) < tol:
            p = expit(b0 + b1 * x)
            wt = p * (1.0 - p)
            t = wt * x
            s00 = wt.sum()
            s01 = t.sum()
            s11 = t @ x
            det = s00 * s11 - s01 * s01
            if det <= 0.0 or not math.isfinite(det):
                raise DegenerateDesign("singular information matrix in logistic fit")
            se = np.sqrt(np.array([s11 / det, s00 / det]))
            return np.array([b0, b1]), se, iteration
    raise NonConvergence(iterations=max_iter)


def logistic_fit(design, response, weights=None, *,
                 max_iter: int = IRLS_MAX_ITER, tol: float = IRLS_TOL) -> LogisticFit:
    """Maximum-likelihood logistic regression via IRLS (Newton-Raphson).

    Parameters
    ----------
    design : (n, k) array
        Design matrix including the intercept column.
    response : (n,) array of {0, 1}
    weights : optional (n,) positive array of sampling weights.

    Convergence is declared when the largest absolute coefficient change
    falls below ``tol``. Standard errors come from the inverse observed
    information. Raises SeparationDetected when any coefficient passes
    +-30 during iteration (quasi-complete separation, including a
    single-class response) and NonConvergence after ``max_iter`` steps.
    """
    X = np.asarray(design, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("design must be (n, k) with a matching response vector")
    ymean = y.mean()
    if not 0.0 < ymean < 1.0:
        raise SeparationDetected("response takes a single value")

    if weights is None and X.shape[1] == 2 and np.all(X[:, 0] == 1.0):
        coef, se, iterations = _irls_two_column(X[:, 1], y, max_iter, tol)
        return LogisticFit(coef=coef, se=se, iterations=iterations)

    w = np.ones_like(y) if weights is None else _as_float_vector("weights", weights)
    if w.shape[0] != y.shape[0]:
        raise ValueError("weights length differs from response")
    k = X.shape[1]
    beta = np.zeros(k)
    for iteration in range(1, max_iter + 1):
        p = expit(X @ beta)
        wt = w * p * (1.0 - p)
        grad = X.T @ (w * (y - p))
        H = X.T @ (wt[:, None] * X)
        try:
            delta = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError as exc:
            raise DegenerateDesign(f"singular information matrix: {exc}") from exc
        beta = beta + delta
        if np.max(np.abs(beta)) > SEPARATION_COEF_BOUND:
            raise SeparationDetected(
                f"coefficient magnitude exceeded {SEPARATION_COEF_BOUND:g} during IRLS"
            )
        if np.max(np.abs(delta)) < tol:
            p = expit(X @ beta)
            wt = w * p * (1.0 - p)
            H = X.T @ (wt[:, None] * X)
            try:
                cov = np.linalg.inv(H)
            except np.linalg.LinAlgError as exc:
                raise DegenerateDesign(f"singular information matrix: {exc}") from exc
            return LogisticFit(coef=beta, se=np.sqrt(np.diag(cov)), iterations=iteration)
    raise NonConvergence(iterations=max_iter)


def logistic_slope(predictor, response) -> EstimateResult:
    """Convenience wrapper: logistic regression of response on (1, predictor)."""
    x = _as_float_vector("predictor", predictor)
    X = np.column_stack((np.ones_like(x), x))
    fit = logistic_fit(X, response)
    return fit.slope_result(n_used=x.shape[0])


def ratio_estimate(numerator: EstimateResult, denominator: EstimateResult) -> EstimateResult:
    """Wald ratio: numerator slope over denominator slope.

    The standard error is the first-order delta rule
    se(num) / |den.beta_hat|, ignoring denominator uncertainty.
    """
    if denominator.beta_hat == 0.0:
        raise ZeroDenominator("denominator coefficient is exactly zero")
    beta = numerator.beta_hat / denominator.beta_hat
    se = numerator.se / abs(denominator.beta_hat)
    return _result(beta, se, numerator.n_used)


def trim_weights(weights, percentile: float) -> np.ndarray:
    """Cap weights above the given empirical percentile at that percentile.

    The threshold is the order statistic at rank floor(1 + (p/100)(n-1)),
    i.e. ``np.percentile(..., method="lower")`` — no interpolation between
    order statistics. Because the threshold is itself one of the weights,
    trimming is exactly idempotent: re-trimming a trimmed vector is a
    no-op, and raising the percentile never lowers a weight.
    percentile = 100 is the identity.
    """
    w = _as_float_vector("weights", weights)
    if not 0.0 < percentile <= 100.0:
        raise ValueError("percentile must lie in (0, 100]")
    if percentile == 100.0:
        return w
    threshold = np.percentile(w, percentile, method="lower")
    return np.minimum(w, threshold)


def fit_selection_model(cohort: Cohort) -> LogisticFit:
    """Logistic regression of S on (1, X) over the full population.

    This working model deliberately omits U and Y even when the truth
    includes them — that misspecification is exactly the object of
    study for the weighted analyses.
    """
    X = np.column_stack((np.ones_like(cohort.x), cohort.x))
    return logistic_fit(X, cohort.s.astype(np.float64))


def selection_weights(cohort: Cohort, sample: SampleIndex,
                      fit: LogisticFit | None = None) -> np.ndarray:
    """Untrimmed inverse-probability weights 1/pi_hat for the sample.

    Warns with ExtremeWeights when max(w)/median(w) > 1e4.
    """
    if fit is None:
        fit = fit_selection_model(cohort)
    xs = cohort.x[sample.indices]
    pi_hat = expit(fit.coef[0] + fit.coef[1] * xs)
    w = 1.0 / pi_hat
    ratio = float(w.max() / np.median(w))
    if ratio > EXTREME_WEIGHT_RATIO:
        warnings.warn(
            f"max/median inverse probability weight ratio {ratio:.3g} exceeds {EXTREME_WEIGHT_RATIO:g}",
            ExtremeWeights,
            stacklevel=2,
        )
    return w


def ipw_pipeline(cohort: Cohort, sample: SampleIndex, trim_percentile: float = 100.0,
                 fit: LogisticFit | None = None) -> EstimateResult:
    """Full inverse-probability-weighted ratio estimate for one sample.

    Fits the selection model on the full population (unless a fit is
    supplied), weights the sampled individuals by 1/pi_hat, trims, and
    returns the ratio of the weighted Y-on-G and X-on-G regressions.
    """
    w = selection_weights(cohort, sample, fit)
    w = trim_weights(w, trim_percentile)
    idx = sample.indices
    gs = cohort.g[idx]
    num = ols_weighted(gs, cohort.y[idx], w)
    den = ols_weighted(gs, cohort.x[idx], w)
    return ratio_estimate(num, den)
