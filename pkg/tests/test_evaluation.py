import numpy as np
import pytest

from rgbdsal.evaluation import evaluate_dataset, roc_auc


def pairwise_auc(salmap, mask):
    """Mann-Whitney statistic: fraction of (positive, negative) pixel pairs
    ranked correctly, ties counting one half.  Independent oracle for the
    threshold-sweep implementation."""
    pos = salmap[mask.astype(bool)].ravel()
    neg = salmap[~mask.astype(bool)].ravel()
    wins = 0.0
    for p in pos:
        wins += np.sum(p > neg) + 0.5 * np.sum(p == neg)
    return wins / (len(pos) * len(neg))


class TestRocAuc:
    def test_perfect_map(self):
        gt = np.zeros((4, 4), dtype=bool)
        gt[1:3, 1:3] = True
        _, auc = roc_auc(gt.astype(float), gt)
        assert auc == 1.0

    def test_constant_map_is_chance(self):
        gt = np.zeros((4, 4), dtype=bool)
        gt[0, 0] = True
        _, auc = roc_auc(np.full((4, 4), 0.37), gt)
        assert auc == 0.5

    def test_matches_pairwise_statistic_on_random_instances(self):
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(200):
            s = rng.uniform(size=(8, 8))
            gt = rng.uniform(size=(8, 8)) < 0.4
            if gt.all() or not gt.any():
                continue
            _, auc = roc_auc(s, gt)
            worst = max(worst, abs(auc - pairwise_auc(s, gt)))
        assert worst <= 1.0 / 256.0

    def test_converges_to_pairwise_with_more_thresholds(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            s = rng.uniform(size=(32, 32))
            gt = rng.uniform(size=(32, 32)) < 0.3
            _, auc = roc_auc(s, gt, thresholds=4096)
            assert abs(auc - pairwise_auc(s, gt)) <= 1e-3

    def test_invariant_under_monotone_transform(self):
        # the sweep is rank-based up to threshold quantization: transforms
        # that keep the value spread within the 256-level grid stay within
        # 1/256, while the exact pairwise statistic is invariant under any
        # strictly monotone transform
        transforms = [
            np.sqrt,
            lambda x: x**0.8,
            lambda x: x**1.25,
            lambda x: 1 / (1 + np.exp(-4 * (x - 0.5))),
            lambda x: np.where(x < 0.5, 0.5 * x, x - 0.25),
        ]
        for seed in range(30):
            rng = np.random.default_rng(seed)
            s = rng.uniform(size=(8, 8))
            gt = rng.uniform(size=(8, 8)) < 0.5
            if gt.all() or not gt.any():
                continue
            _, auc = roc_auc(s, gt)
            exact = pairwise_auc(s, gt)
            for f in transforms:
                _, auc_t = roc_auc(f(s), gt)
                assert abs(auc_t - auc) <= 1.0 / 256.0
                assert pairwise_auc(f(s), gt) == pytest.approx(exact, abs=1e-12)
            # a bin-collapsing squash still preserves exact ranks
            assert pairwise_auc(s**9, gt) == pytest.approx(exact, abs=1e-12)

    def test_curve_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(4)
        s = rng.uniform(size=(10, 10))
        gt = rng.uniform(size=(10, 10)) < 0.5
        curve, _ = roc_auc(s, gt)
        assert (curve.fpr[0], curve.tpr[0]) == (0.0, 0.0)
        assert (curve.fpr[-1], curve.tpr[-1]) == (1.0, 1.0)
        assert np.all(np.diff(curve.fpr) >= 0)
        assert np.all(np.diff(curve.tpr) >= 0)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            roc_auc(np.zeros((3, 3)), np.ones((3, 3), dtype=bool))
        with pytest.raises(ValueError):
            roc_auc(np.zeros((3, 3)), np.zeros((3, 3), dtype=bool))

    def test_extent_mismatch_rejected(self):
        with pytest.raises(ValueError):
            roc_auc(np.zeros((3, 3)), np.zeros((3, 4), dtype=bool))


class TestEvaluateDataset:
    def _gt(self):
        gt = np.zeros((4, 4), dtype=bool)
        gt[1:3, 1:3] = True
        return gt

    def test_single_perfect_map(self):
        gt = self._gt()
        report = evaluate_dataset([("a", gt.astype(float), gt)])
        assert report.mean_auc == 1.0
        assert report.per_image == (("a", 1.0),)

    def test_mean_of_two(self):
        gt = self._gt()
        report = evaluate_dataset(
            [("a", gt.astype(float), gt), ("b", np.full((4, 4), 0.5), gt)]
        )
        assert report.mean_auc == pytest.approx(0.75)

    def test_mean_is_arithmetic_mean(self):
        gt = self._gt()
        rng = np.random.default_rng(1)
        entries = [(f"i{k}", rng.uniform(size=(4, 4)), gt) for k in range(5)]
        report = evaluate_dataset(entries)
        assert report.mean_auc == pytest.approx(np.mean([a for _, a in report.per_image]))

    def test_permutation_invariant_mean(self):
        gt = self._gt()
        rng = np.random.default_rng(2)
        entries = [(f"i{k}", rng.uniform(size=(4, 4)), gt) for k in range(6)]
        r1 = evaluate_dataset(entries)
        r2 = evaluate_dataset(entries[::-1])
        assert r1.mean_auc == pytest.approx(r2.mean_auc)

    def test_unmatched_pair_skipped_not_fatal(self):
        gt = self._gt()
        entries = [
            ("good", gt.astype(float), gt),
            ("bad_extent", np.zeros((2, 2)), gt),
            ("bad_mask", np.zeros((4, 4)), np.zeros((4, 4), dtype=bool)),
        ]
        report = evaluate_dataset(entries)
        assert [i for i, _ in report.per_image] == ["good"]
        assert sorted(i for i, _ in report.skipped) == ["bad_extent", "bad_mask"]

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            evaluate_dataset([])

    def test_csv_output(self, tmp_path):
        gt = self._gt()
        report = evaluate_dataset([("a", gt.astype(float), gt)])
        out = tmp_path / "report.csv"
        report.to_csv(out)
        lines = out.read_text().splitlines()
        assert lines[0] == "image_id,auc"
        assert lines[1] == "a,1.000000"
        assert "mean AUC" in report.summary_text()
