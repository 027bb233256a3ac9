import numpy as np
import pytest

from femrisk.errors import DataError, NumericalError
from femrisk.stats import auc_mann_whitney, delong_compare, roc_curve


def auc_by_enumeration(scores, labels):
    """O(n*m) oracle: fraction of (pos, neg) pairs ranked correctly,
    ties counting one half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    pos = s[y == 1]
    neg = s[y == 0]
    wins = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (wins + 0.5 * ties) / (pos.size * neg.size)


class TestAuc:
    def test_matches_pair_enumeration_with_ties(self, rng):
        for _ in range(50):
            n = int(rng.integers(10, 200))
            y = rng.integers(0, 2, size=n)
            if y.min() == y.max():
                y[0] = 1 - y[0]
            # Coarse rounding forces plenty of ties.
            s = np.round(rng.normal(size=n) + y, 1)
            assert auc_mann_whitney(s, y) == pytest.approx(
                auc_by_enumeration(s, y), abs=1e-12)

    def test_perfect_and_inverted(self):
        y = [0, 0, 1, 1]
        assert auc_mann_whitney([1, 2, 3, 4], y) == 1.0
        assert auc_mann_whitney([4, 3, 2, 1], y) == 0.0

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            auc_mann_whitney([1.0, 2.0], [1, 1])


class TestRocCurve:
    def test_endpoints_and_area(self, rng):
        y = rng.integers(0, 2, size=80)
        y[:2] = [0, 1]
        s = rng.normal(size=80) + 0.8 * y
        curve = roc_curve(s, y)
        assert (curve.fpr[0], curve.tpr[0]) == (0.0, 0.0)
        assert (curve.fpr[-1], curve.tpr[-1]) == (1.0, 1.0)
        assert np.all(np.diff(curve.fpr) >= 0)
        assert np.all(np.diff(curve.tpr) >= 0)
        area = np.trapezoid(curve.tpr, curve.fpr)
        assert area == pytest.approx(auc_mann_whitney(s, y), abs=1e-12)


class TestDeLong:
    def test_identical_scores(self, rng):
        y = rng.integers(0, 2, size=40)
        y[:2] = [0, 1]
        s = rng.normal(size=40)
        res = delong_compare(s, s.copy(), y)
        assert res.z == 0.0 and res.p == 0.5

    def test_monotone_transform_invariance(self, rng):
        y = rng.integers(0, 2, size=60)
        y[:2] = [0, 1]
        a = rng.normal(size=60) + y
        b = rng.normal(size=60) + 0.5 * y
        r1 = delong_compare(a, b, y)
        r2 = delong_compare(np.exp(a), 3 * b - 7, y)
        assert r1.z == pytest.approx(r2.z, abs=1e-12)
        assert r1.p == pytest.approx(r2.p, abs=1e-12)

    def test_direction_flip(self, rng):
        y = rng.integers(0, 2, size=60)
        y[:2] = [0, 1]
        a = rng.normal(size=60) + y
        b = rng.normal(size=60)
        fwd = delong_compare(a, b, y, direction="a_greater")
        rev = delong_compare(a, b, y, direction="b_greater")
        assert fwd.p == pytest.approx(1 - rev.p, abs=1e-12)

    def test_variance_close_to_jackknife(self, rng):
        n = 20
        y = np.array([1] * 8 + [0] * 12)
        a = rng.normal(size=n) + 1.2 * y
        b = rng.normal(size=n) + 0.5 * y
        res = delong_compare(a, b, y)

        def delta(idx):
            return (auc_mann_whitney(a[idx], y[idx])
                    - auc_mann_whitney(b[idx], y[idx]))

        thetas = np.array([delta(np.delete(np.arange(n), i)) for i in range(n)])
        var_jack = (n - 1) / n * ((thetas - thetas.mean()) ** 2).sum()
        assert res.var_diff == pytest.approx(var_jack, rel=0.10)

    def test_mismatched_lengths(self):
        with pytest.raises(DataError):
            delong_compare([1.0, 2.0], [1.0], [0, 1])

    def test_zero_variance_nonzero_delta(self):
        y = np.array([0, 0, 1, 1])
        a = np.array([1.0, 2.0, 3.0, 4.0])   # AUC 1
        b = np.array([4.0, 3.0, 2.0, 1.0])   # AUC 0
        with pytest.raises(NumericalError):
            delong_compare(a, b, y)


class TestBootstrapAgreement:
    def test_p_close_to_stratified_bootstrap(self, rng):
        n_pos, n_neg = 8, 12
        y = np.array([1] * n_pos + [0] * n_neg)
        a = rng.normal(size=20) + 1.0 * y
        b = rng.normal(size=20) + 0.3 * y
        res = delong_compare(a, b, y)

        draws = 100_000
        pos_idx = rng.integers(0, n_pos, size=(draws, n_pos))
        neg_idx = rng.integers(0, n_neg, size=(draws, n_neg)) + n_pos
        pa, na = a[pos_idx], a[neg_idx]
        pb, nb = b[pos_idx], b[neg_idx]

        def boot_auc(p, q):
            wins = (p[:, :, None] > q[:, None, :]).sum(axis=(1, 2))
            ties = (p[:, :, None] == q[:, None, :]).sum(axis=(1, 2))
            return (wins + 0.5 * ties) / (n_pos * n_neg)

        delta = boot_auc(pa, na) - boot_auc(pb, nb)
        p_boot = np.mean(delta <= 0)
        assert res.p == pytest.approx(p_boot, abs=0.02)
