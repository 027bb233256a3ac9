"""ROC curves, Mann-Whitney AUC with tie handling, and DeLong's paired test."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from ..errors import DataError, NumericalError


@dataclass(frozen=True)
class RocCurve:
    """Threshold-swept ROC curve.  Points run from (0, 0) to (1, 1)."""

    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray


@dataclass(frozen=True)
class DeLongResult:
    auc_a: float
    auc_b: float
    var_diff: float
    z: float
    p: float
    direction: str


def _check_labels(labels) -> np.ndarray:
    y = np.asarray(labels, dtype=int)
    if not set(np.unique(y)) <= {0, 1}:
        raise DataError("labels must be 0/1")
    if y.min() == y.max():
        raise DataError("both classes must be present")
    return y


def roc_curve(scores, labels) -> RocCurve:
    """ROC via a sweep over the unique score values as thresholds.

    A point (fpr, tpr) at threshold t classifies score >= t as positive.
    """
    y = _check_labels(labels)
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    # Cumulative counts at each distinct threshold.
    distinct = np.r_[np.diff(s_sorted) != 0, True]
    tp = np.cumsum(y_sorted)[distinct]
    fp = np.cumsum(1 - y_sorted)[distinct]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    thresholds = np.r_[np.inf, s_sorted[distinct]]
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds)


def _midranks(x: np.ndarray) -> np.ndarray:
    """Midranks (1-based); tied values get the mean of their rank range."""
    order = np.argsort(x, kind="stable")
    z = x[order]
    n = x.size
    ranks = np.empty(n, dtype=float)
    i = 0
    while i < n:
        j = i
        while j < n and z[j] == z[i]:
            j += 1
        ranks[i:j] = 0.5 * (i + j - 1) + 1.0
        i = j
    out = np.empty(n, dtype=float)
    out[order] = ranks
    return out


def auc_mann_whitney(scores, labels) -> float:
    """AUC as the Mann-Whitney statistic with ties counted one half."""
    y = _check_labels(labels)
    s = np.asarray(scores, dtype=float)
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    ranks = _midranks(s)
    rank_sum_pos = ranks[y == 1].sum()
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def roc_auc(scores, labels):
    """ROC curve plus Mann-Whitney AUC.  Higher score = positive class."""
    return roc_curve(scores, labels), auc_mann_whitney(scores, labels)


def _placements(scores: np.ndarray, y: np.ndarray):
    """DeLong structural components (placement values) for one score vector.

    Returns (auc, v10 per case, v01 per control), each using midranks so
    ties count one half.
    """
    pos = scores[y == 1]
    neg = scores[y == 0]
    m = pos.size
    n = neg.size
    all_ranks = _midranks(np.r_[pos, neg])
    pos_ranks = _midranks(pos)
    neg_ranks = _midranks(neg)
    v10 = (all_ranks[:m] - pos_ranks) / n
    v01 = 1.0 - (all_ranks[m:] - neg_ranks) / m
    auc = v10.mean()
    return auc, v10, v01


def delong_compare(scores_a, scores_b, labels, direction="a_greater") -> DeLongResult:
    """Paired DeLong test for correlated ROC AUCs on the same subjects.

    direction "a_greater" gives the one-sided p for AUC_a > AUC_b
    ("b_greater" for the reverse).  Identical scores give z = 0, p = 0.5.
    """
    if direction not in ("a_greater", "b_greater"):
        raise ValueError(f"unknown direction {direction!r}")
    y = _check_labels(labels)
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    if a.shape != b.shape or a.shape[0] != y.shape[0]:
        raise DataError("score vectors and labels must have equal length")
    auc_a, v10_a, v01_a = _placements(a, y)
    auc_b, v10_b, v01_b = _placements(b, y)
    m = v10_a.size
    n = v01_a.size
    s10 = np.cov(np.vstack([v10_a, v10_b]), ddof=1) if m > 1 else np.zeros((2, 2))
    s01 = np.cov(np.vstack([v01_a, v01_b]), ddof=1) if n > 1 else np.zeros((2, 2))
    cov = s10 / m + s01 / n
    var_diff = cov[0, 0] + cov[1, 1] - 2.0 * cov[0, 1]
    delta = auc_a - auc_b
    if var_diff <= 0:
        if abs(delta) < 1e-15:
            z = 0.0
        else:
            raise NumericalError("degenerate DeLong comparison: zero variance, nonzero AUC difference")
    else:
        z = delta / math.sqrt(var_diff)
    # z > 0 favours a; the requested direction picks the tail.
    if direction == "a_greater":
        p = sps.norm.sf(z)
    else:
        p = sps.norm.cdf(z)
    return DeLongResult(auc_a=auc_a, auc_b=auc_b, var_diff=max(var_diff, 0.0),
                        z=z, p=float(p), direction=direction)
