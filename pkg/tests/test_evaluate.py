import json

import numpy as np
import pytest

from femrisk.classifiers import ClassifierSpec, model_to_json
from femrisk.datamodel import FeatureSet
from femrisk.errors import DataError
from femrisk.evaluate import (CvConfig, ResampleConfig, build_report,
                              compare_with_frax, fit_and_score, mix_seed,
                              run_lgocv, run_resample_comparison,
                              stratified_split, stratified_split_indices)
from femrisk.stats import paired_one_sided_ttest

FS_PC1 = FeatureSet.parse("PC1_ABMD_COV")
FS_ABMD = FeatureSet.parse("ABMD_COV")
LOGIT = ClassifierSpec("logistic")


class TestMixSeed:
    def test_deterministic_and_order_sensitive(self):
        assert mix_seed(1, 2, 3) == mix_seed(1, 2, 3)
        assert mix_seed(1, 2, 3) != mix_seed(1, 3, 2)
        assert mix_seed(1, 2, 3) != mix_seed(2, 2, 3)

    def test_64_bit_range(self):
        for s in (mix_seed(0, 0, 0), mix_seed(2 ** 64 - 1, 5)):
            assert 0 <= s < 2 ** 64


class TestStratifiedSplit:
    def test_class_counts_preserved(self):
        y = np.array([1] * 110 + [0] * 235)
        tr, te = stratified_split_indices(y, 0.8, seed=0)
        assert (y[tr] == 1).sum() == 88
        assert (y[tr] == 0).sum() == 188
        assert len(set(tr) & set(te)) == 0
        assert len(tr) + len(te) == 345

    def test_both_classes_on_both_sides(self):
        y = np.array([1, 1, 0, 0, 0])
        for seed in range(20):
            tr, te = stratified_split_indices(y, 0.8, seed)
            assert 0 < y[tr].sum() < 2 or y[tr].sum() == 1
            assert set(y[te]) <= {0, 1} and y[te].size >= 1
            assert y[tr].min() == 0 and y[tr].max() == 1

    def test_cohort_split_roundtrips(self, small_cohort):
        tr, te = stratified_split(small_cohort, 0.75, seed=4)
        assert len(tr) + len(te) == len(small_cohort)
        ids = {r.id for r in small_cohort}
        assert {r.id for r in tr} | {r.id for r in te} == ids

    def test_tiny_class_rejected(self):
        with pytest.raises(DataError):
            stratified_split_indices(np.array([1, 0, 0]), 0.8, 0)


class TestNoLeakage:
    def test_held_out_rows_cannot_change_fit(self, small_cohort):
        tr, te = stratified_split(small_cohort, 0.8, seed=1)
        _, _, model_a = fit_and_score(tr, te, FS_PC1, LOGIT)
        # Replace the test cohort entirely; the trained model must be
        # identical because nothing may be fit on held-out data.
        te2 = tr.subset(range(10))
        _, _, model_b = fit_and_score(tr, te2, FS_PC1, LOGIT)
        assert model_to_json(model_a) == model_to_json(model_b)


class TestLgocv:
    def test_shape_and_range(self, small_cohort):
        aucs = run_lgocv(small_cohort, FS_PC1, LOGIT, CvConfig(repeats=5, seed=2))
        assert aucs.shape == (5,)
        assert np.all((aucs >= 0) & (aucs <= 1))

    def test_deterministic(self, small_cohort):
        cfg = CvConfig(repeats=4, seed=7)
        a = run_lgocv(small_cohort, FS_PC1, LOGIT, cfg)
        b = run_lgocv(small_cohort, FS_PC1, LOGIT, cfg)
        np.testing.assert_array_equal(a, b)


class TestResampling:
    def test_cells_share_splits_and_pairing_holds(self, small_cohort):
        cfg = ResampleConfig(resamples=30, seed=3)
        res = run_resample_comparison(small_cohort, [FS_PC1, FS_ABMD], [LOGIT], cfg)
        assert set(res.cells) == {"PC1_ABMD_COV|logistic", "ABMD_COV|logistic"}
        assert len(res.split_seeds) == 30
        # Paired test on the shared splits must match a direct computation.
        key = "PC1_ABMD_COV|logistic>ABMD_COV|logistic"
        assert key in res.comparisons
        direct = paired_one_sided_ttest(res.cells["PC1_ABMD_COV|logistic"],
                                        res.cells["ABMD_COV|logistic"])
        assert res.comparisons[key].p == direct.p

    def test_threads_do_not_change_results(self, small_cohort):
        cfg = ResampleConfig(resamples=20, seed=5)
        r1 = run_resample_comparison(small_cohort, [FS_PC1], [LOGIT], cfg, threads=1)
        r4 = run_resample_comparison(small_cohort, [FS_PC1], [LOGIT], cfg, threads=4)
        np.testing.assert_array_equal(r1.cells["PC1_ABMD_COV|logistic"],
                                      r4.cells["PC1_ABMD_COV|logistic"])

    def test_explicit_comparison_direction(self, small_cohort):
        cfg = ResampleConfig(resamples=10, seed=6)
        res = run_resample_comparison(
            small_cohort, [FS_PC1, FS_ABMD], [LOGIT], cfg,
            comparisons=[("ABMD_COV|logistic", "PC1_ABMD_COV|logistic")])
        assert list(res.comparisons) == ["ABMD_COV|logistic>PC1_ABMD_COV|logistic"]

    def test_unknown_cell_in_comparison(self, small_cohort):
        cfg = ResampleConfig(resamples=10, seed=6)
        with pytest.raises(DataError):
            run_resample_comparison(small_cohort, [FS_PC1], [LOGIT], cfg,
                                    comparisons=[("nope|x", "PC1_ABMD_COV|logistic")])


class TestFraxComparison:
    def test_requires_frax(self, small_cohort):
        tr, te = stratified_split(small_cohort, 0.8, seed=1)
        scores, _, _ = fit_and_score(tr, te, FS_PC1, LOGIT)
        result, roc_m, roc_f = compare_with_frax(te, scores)
        assert 0 <= result.p <= 1
        assert roc_m.fpr[0] == 0.0 and roc_f.tpr[-1] == 1.0

    def test_score_alignment_checked(self, small_cohort):
        with pytest.raises(DataError):
            compare_with_frax(small_cohort, np.zeros(3))


class TestReport:
    def test_empty_comparisons_valid_json(self):
        text = build_report({"cells": {}, "comparisons": {}}, {}, seed=0)
        doc = json.loads(text)
        assert doc["comparisons"] == {} and doc["seed"] == 0

    def test_byte_identical_regeneration(self, small_cohort):
        cfg = ResampleConfig(resamples=15, seed=9)
        outs = []
        for _ in range(2):
            res = run_resample_comparison(small_cohort, [FS_PC1], [LOGIT], cfg)
            outs.append(build_report({"cells": res.cells,
                                      "comparisons": res.comparisons},
                                     {"resamples": 15}, seed=9))
        assert outs[0] == outs[1]

    def test_six_significant_digits(self):
        text = build_report({"cells": {"c": [0.123456789, 0.2]},
                             "comparisons": {}}, {}, seed=1)
        doc = json.loads(text)
        assert doc["cells"]["c"]["aucs"][0] == 0.123457
