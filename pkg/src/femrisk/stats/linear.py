"""Ordinary least squares with the screening procedure used for the FE
parameter regressions: simple-regression screening at p < 0.1 plus the
interaction hierarchy (a retained interaction forces its main effects in).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ..errors import DataError, NumericalError


@dataclass(frozen=True)
class LinearModelFit:
    names: tuple[str, ...]
    coef: np.ndarray
    se: np.ndarray
    p: np.ndarray
    r_squared: float
    df_resid: int


def fit_linear_model(y, x, names) -> LinearModelFit:
    """OLS fit.  x must already include the intercept column.

    Standard errors come from sigma^2 (X'X)^-1 and p-values from the
    two-sided t distribution with n - k degrees of freedom.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    n, k = x.shape
    if len(names) != k:
        raise DataError("names length must match column count")
    if n <= k:
        raise DataError(f"need more rows ({n}) than columns ({k})")
    if np.linalg.matrix_rank(x) < k:
        raise NumericalError("design matrix is rank deficient")
    xtx = x.T @ x
    coef = np.linalg.solve(xtx, x.T @ y)
    resid = y - x @ coef
    rss = float(resid @ resid)
    df = n - k
    sigma2 = rss / df
    cov = sigma2 * np.linalg.inv(xtx)
    se = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / se, 0.0)
    p = 2.0 * sps.t.sf(np.abs(t), df)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return LinearModelFit(names=tuple(names), coef=coef, se=se, p=p,
                          r_squared=r2, df_resid=df)


MAIN_EFFECTS = ("fx", "age", "sex", "height", "weight")
INTERACTIONS = ("fx:age", "fx:sex", "fx:height", "fx:weight")


def screen_and_select(columns: dict[str, np.ndarray], dependent: np.ndarray,
                      alpha: float = 0.1) -> list[str]:
    """Two-step term selection for one FE-parameter regression.

    columns maps candidate names (fx, age, sex, height, weight) to vectors;
    continuous variables and the dependent are expected to be standardized
    already (fx and sex are 0/1 indicators and are left alone).

    Step 1 screens each main effect by simple regression, keeping p < alpha.
    Step 2 tests each interaction in a model with its two main effects;
    a retained interaction force-retains both.
    """
    missing = [c for c in MAIN_EFFECTS if c not in columns]
    if missing:
        raise DataError(f"missing candidate columns: {missing}")
    y = np.asarray(dependent, dtype=float)
    n = y.size
    ones = np.ones(n)

    selected: list[str] = []
    for name in MAIN_EFFECTS:
        x = np.column_stack([ones, columns[name]])
        fit = fit_linear_model(y, x, ("intercept", name))
        if fit.p[1] < alpha:
            selected.append(name)

    forced: set[str] = set()
    for inter in INTERACTIONS:
        partner = inter.split(":")[1]
        x = np.column_stack([
            ones,
            columns["fx"],
            columns[partner],
            columns["fx"] * columns[partner],
        ])
        fit = fit_linear_model(y, x, ("intercept", "fx", partner, inter))
        if fit.p[3] < alpha:
            selected.append(inter)
            forced.update(("fx", partner))

    # Force-retained main effects go in ahead of the interactions.
    out: list[str] = []
    for name in MAIN_EFFECTS:
        if name in selected or name in forced:
            out.append(name)
    for name in selected:
        if ":" in name:
            out.append(name)
    return out


def design_from_terms(columns: dict[str, np.ndarray], terms: list[str]):
    """Build an intercept-plus-terms design matrix for fit_linear_model."""
    n = next(iter(columns.values())).size
    mats = [np.ones(n)]
    names = ["intercept"]
    for t in terms:
        if ":" in t:
            a, b = t.split(":")
            mats.append(np.asarray(columns[a]) * np.asarray(columns[b]))
        else:
            mats.append(np.asarray(columns[t]))
        names.append(t)
    return np.column_stack(mats), tuple(names)
