"""PCA on the standardized FE parameters and the PC1 risk index.

The decomposition is an eigendecomposition of the correlation matrix
(covariance of pooled-standardized columns).  The PC1 sign is fixed so the
loading on the stance ultimate load (Su) is positive: a higher index means
a stronger femur.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datamodel import FE9, StandardizationParams, standardize_apply, standardize_fit
from ..errors import DataError
from .logistic import fit_logistic


@dataclass(frozen=True)
class PcaModel:
    standardization: StandardizationParams
    loadings: np.ndarray          # columns are component loading vectors
    eigenvalues: np.ndarray       # descending, >= 0
    variance_shares: np.ndarray
    column_names: tuple[str, ...]


def fit_pca(x, column_names=FE9) -> PcaModel:
    """Fit PCA to a matrix of FE parameters (rows = subjects)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError("need a 2-D matrix with at least 2 rows")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite values in PCA input")
    if len(column_names) != x.shape[1]:
        raise DataError("column_names length must match columns")
    params = standardize_fit(x)          # raises on constant columns
    z = standardize_apply(params, x)
    corr = (z.T @ z) / (z.shape[0] - 1)
    corr = 0.5 * (corr + corr.T)
    eigvals, eigvecs = np.linalg.eigh(corr)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    # Deterministic sign: each component's largest-magnitude loading positive,
    # then PC1 pinned to a positive Su loading.
    for j in range(eigvecs.shape[1]):
        pivot = np.argmax(np.abs(eigvecs[:, j]))
        if eigvecs[pivot, j] < 0:
            eigvecs[:, j] = -eigvecs[:, j]
    names = tuple(column_names)
    if "Su" in names:
        su = names.index("Su")
        if eigvecs[su, 0] < 0:
            eigvecs[:, 0] = -eigvecs[:, 0]
    shares = eigvals / eigvals.sum()
    return PcaModel(standardization=params, loadings=eigvecs,
                    eigenvalues=eigvals, variance_shares=shares,
                    column_names=names)


def pc_scores(model: PcaModel, x) -> np.ndarray:
    """Project rows onto all principal components."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != model.loadings.shape[0]:
        raise DataError("dimension mismatch with PCA model")
    z = standardize_apply(model.standardization, x)
    s = z @ model.loadings
    return s[0] if squeeze else s


def risk_index(model: PcaModel, x) -> np.ndarray:
    """PC1 projection: the global fracture risk index (higher = stronger)."""
    s = pc_scores(model, x)
    return s[..., 0] if s.ndim > 1 else s[0]


def pca_to_json(model: PcaModel) -> dict:
    return {
        "column_names": list(model.column_names),
        "mean": model.standardization.mean.tolist(),
        "sd": model.standardization.sd.tolist(),
        "loadings": model.loadings.tolist(),
        "eigenvalues": model.eigenvalues.tolist(),
        "variance_shares": model.variance_shares.tolist(),
    }


def pca_from_json(doc: dict) -> PcaModel:
    try:
        params = StandardizationParams(mean=np.array(doc["mean"], dtype=float),
                                       sd=np.array(doc["sd"], dtype=float))
        return PcaModel(standardization=params,
                        loadings=np.array(doc["loadings"], dtype=float),
                        eigenvalues=np.array(doc["eigenvalues"], dtype=float),
                        variance_shares=np.array(doc["variance_shares"], dtype=float),
                        column_names=tuple(doc["column_names"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed PCA model JSON: {exc}") from exc


def select_significant_pcs(scores, labels, alpha: float = 0.05):
    """Indices (0-based) of PCs whose univariate logistic slope has
    Wald p < alpha."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 2:
        raise DataError("scores must be (n_subjects, n_components)")
    y = np.asarray(labels, dtype=int)
    if y.min() == y.max():
        raise DataError("both classes must be present")
    retained = []
    pvals = []
    for j in range(s.shape[1]):
        fit = fit_logistic(y, s[:, j])
        pvals.append(float(fit.p[1]))
        if fit.p[1] < alpha:
            retained.append(j)
    return retained, np.array(pvals)
