"""Binary logistic regression by iteratively reweighted least squares.

Supports an optional ridge penalty on the slopes (never the intercept) and
falls back to a small ridge automatically when the likelihood is monotone
(perfect separation), flagging the fit as penalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ..errors import DataError, NumericalError

SCORE_TOL = 1e-8
COEF_TOL = 1e-10
MAX_ITER = 100
SEPARATION_RIDGE = 1e-4
COEF_DIVERGENCE = 1e3


@dataclass(frozen=True)
class LogisticFit:
    names: tuple[str, ...]
    intercept: float
    coef: np.ndarray            # slopes, excluding the intercept
    se: np.ndarray              # intercept first, then slopes
    p: np.ndarray               # Wald p-values, intercept first
    converged: bool
    iterations: int
    penalized: bool
    ridge: float

    @property
    def beta(self) -> np.ndarray:
        """Full coefficient vector, intercept first."""
        return np.r_[self.intercept, self.coef]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        eta = self.intercept + x @ self.coef
        return _sigmoid(eta)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta, dtype=float)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ez = np.exp(eta[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _irls(y, xd, ridge):
    """One IRLS run.  xd includes the intercept column; ridge skips it."""
    n, k = xd.shape
    pen = np.full(k, ridge)
    pen[0] = 0.0
    beta = np.zeros(k)
    # Prevalence-matched intercept start.
    pbar = y.mean()
    beta[0] = math.log(pbar / (1.0 - pbar))
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        eta = xd @ beta
        mu = _sigmoid(eta)
        w = mu * (1.0 - mu)
        score = xd.T @ (y - mu) - pen * beta
        h = xd.T @ (xd * w[:, None]) + np.diag(pen)
        try:
            step = np.linalg.solve(h, score)
        except np.linalg.LinAlgError:
            raise NumericalError("singular IRLS system")
        beta_new = beta + step
        if np.max(np.abs(score)) < SCORE_TOL or np.max(np.abs(step)) < COEF_TOL:
            beta = beta_new
            converged = True
            break
        beta = beta_new
        if np.max(np.abs(beta)) > COEF_DIVERGENCE:
            return beta, False, it, None
    eta = xd @ beta
    mu = _sigmoid(eta)
    w = mu * (1.0 - mu)
    h = xd.T @ (xd * w[:, None]) + np.diag(pen)
    try:
        cov = np.linalg.inv(h)
    except np.linalg.LinAlgError:
        return beta, False, it, None
    return beta, converged, it, cov


def fit_logistic(y, x, ridge: float = 0.0, names=None) -> LogisticFit:
    """Fit logit(Pr(y=1)) = b0 + x @ b by IRLS.

    x excludes the intercept column (it is added internally).  On detected
    separation the fit is retried with ridge = 1e-4 and flagged penalized.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] != y.shape[0]:
        raise DataError("x and y must have the same number of rows")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise DataError("y must be 0/1")
    if y.min() == y.max():
        raise DataError("both classes must be present")
    if ridge < 0:
        raise DataError("ridge must be >= 0")
    k = x.shape[1]
    if names is None:
        names = ("intercept",) + tuple(f"x{i}" for i in range(k))
    xd = np.column_stack([np.ones(y.size), x])

    beta, converged, it, cov = _irls(y, xd, ridge)
    penalized = ridge > 0
    used_ridge = ridge
    if converged and cov is not None and ridge == 0.0:
        # A converged unpenalized fit whose probabilities saturate to the
        # labels means the likelihood is monotone (separation): the score
        # vanishes at any sufficiently large coefficient.
        p_hat = _sigmoid(xd @ beta)
        if np.all(np.abs(y - p_hat) < 1e-4):
            converged = False
    if not converged or cov is None:
        # Monotone likelihood (separation) or numerical trouble: small ridge.
        beta, converged, it2, cov = _irls(y, xd, max(ridge, SEPARATION_RIDGE))
        it += it2 if cov is not None else 0
        penalized = True
        used_ridge = max(ridge, SEPARATION_RIDGE)
        if not converged or cov is None:
            raise NumericalError("logistic regression failed to converge")
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, 0.0)
    p = 2.0 * sps.norm.sf(np.abs(z))
    return LogisticFit(
        names=tuple(names), intercept=float(beta[0]), coef=beta[1:],
        se=se, p=p, converged=converged, iterations=it,
        penalized=penalized, ridge=used_ridge,
    )
