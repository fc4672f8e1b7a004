"""Corpus-level pipeline: aggregation, parallelism, config validation."""

from __future__ import annotations

import pytest

from cleval import Perturbation, emit_report, perturb_corpus
from cleval.evaluate import RunConfig, evaluate_corpus, evaluate_image, run_baseline

from helpers import box_word, grid_corpus, self_det_corpus, with_dets


class TestRunConfig:
    def test_mode_aliases(self):
        assert RunConfig(mode="det").mode == "detection"
        assert RunConfig(mode="detection").mode == "detection"
        assert RunConfig(mode="e2e").mode == "e2e"

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            RunConfig(mode="both")

    @pytest.mark.parametrize("kwargs", [
        {"ap_threshold": 0.0}, {"ap_threshold": 1.0},
        {"dont_care_fraction": 1.2}, {"format": "xml"}, {"jobs": -1},
    ])
    def test_invalid_values(self, kwargs):
        with pytest.raises(ValueError):
            RunConfig(**kwargs)


class TestSelfEvaluation:
    def test_detection_identity(self):
        corpus = self_det_corpus(grid_corpus(num_images=3, words_per_image=4))
        report = evaluate_corpus(corpus, RunConfig(mode="det"))
        assert report.recall == 1.0
        assert report.precision == 1.0
        assert report.hmean == 1.0

    def test_e2e_identity_includes_rs(self):
        corpus = self_det_corpus(grid_corpus(num_images=3, words_per_image=4))
        report = evaluate_corpus(corpus, RunConfig(mode="e2e"))
        assert (report.recall, report.precision, report.hmean, report.rs) == \
            (1.0, 1.0, 1.0, 1.0)


class TestAggregation:
    def test_totals_equal_per_image_sums(self):
        corpus = grid_corpus(num_images=4, words_per_image=3)
        det_map = perturb_corpus(corpus, Perturbation("split", 2))
        report = evaluate_corpus(with_dets(corpus, det_map), RunConfig(mode="det"))
        assert report.recall_num == sum(r.recall_num for r in report.per_image)
        assert report.recall_den == sum(r.recall_den for r in report.per_image)
        assert report.precision_num == sum(r.precision_num for r in report.per_image)
        assert report.precision_den == sum(r.precision_den for r in report.per_image)
        attrs = report.attributes
        assert attrs.split == sum(r.attributes.split for r in report.per_image)

    def test_empty_denominators_warn_and_zero(self):
        corpus = grid_corpus(num_images=1, words_per_image=1)
        corpus.images["img_0000"].gts.clear()
        corpus.images["img_0000"].gts.append(
            box_word(0, 0, 60, 10, "###", "img_0000", dont_care=True)
        )
        report = evaluate_corpus(corpus, RunConfig(mode="e2e"))
        assert report.recall == 0.0
        assert report.precision == 0.0
        assert report.rs == 0.0
        assert len(report.warnings) == 3

    def test_textual_noise_does_not_change_detection_scores(self):
        corpus = grid_corpus(num_images=2, words_per_image=3)
        clean = evaluate_corpus(self_det_corpus(corpus), RunConfig(mode="det"))
        noisy_dets = perturb_corpus(corpus, Perturbation("replace", 3, seed=5))
        noisy = evaluate_corpus(with_dets(corpus, noisy_dets), RunConfig(mode="det"))
        assert noisy.recall == clean.recall
        assert noisy.precision == clean.precision


class TestParallelism:
    def test_jobs_do_not_change_bytes(self):
        corpus = grid_corpus(num_images=6, words_per_image=2)
        det_map = perturb_corpus(corpus, Perturbation("overlap", 0.2))
        corpus = with_dets(corpus, det_map)
        serial = evaluate_corpus(corpus, RunConfig(mode="det", jobs=1))
        parallel = evaluate_corpus(corpus, RunConfig(mode="det", jobs=2))
        assert emit_report(serial, "json", per_sample=True) == \
            emit_report(parallel, "json", per_sample=True)


class TestEvaluateImage:
    def test_dont_care_accounting(self):
        gts = [box_word(0, 0, 60, 10, "ABCDEF"),
               box_word(0, 30, 60, 40, "###", dont_care=True)]
        dets = [box_word(0, 0, 60, 10, "ABCDEF"),
                box_word(10, 32, 50, 38, "noise")]
        report = evaluate_image("img_1", gts, dets, mode="det")
        assert report.num_gt_dont_care == 1
        assert report.num_det_absorbed == 1
        assert report.recall == 1.0
        assert report.precision == 1.0

    def test_mode_is_normalized(self):
        gts = [box_word(0, 0, 60, 10, "ABCDEF")]
        report = evaluate_image("img_1", gts, [], mode="det")
        assert report.recall == 0.0
        assert report.num_gt_missed == 1


class TestBaselineRunner:
    def test_perfect_corpus(self):
        corpus = self_det_corpus(grid_corpus(num_images=2, words_per_image=3))
        report = run_baseline(corpus, RunConfig(mode="e2e"))
        assert report.iou_hmean == 1.0
        assert report.crw_hmean == 1.0

    def test_split_collapses_iou_but_not_the_metric(self):
        corpus = grid_corpus(num_images=2, words_per_image=3)
        det_map = perturb_corpus(corpus, Perturbation("split", 2))
        corpus = with_dets(corpus, det_map)
        baseline = run_baseline(corpus, RunConfig(mode="det"))
        metric = evaluate_corpus(corpus, RunConfig(mode="det"))
        assert baseline.iou_hmean == 0.0
        assert metric.hmean > 0.85

    def test_dont_care_respected(self):
        gts = [box_word(0, 0, 60, 10, "ABCDEF"),
               box_word(0, 30, 60, 40, "###", dont_care=True)]
        dets = [box_word(0, 0, 60, 10, "ABCDEF"), box_word(0, 30, 60, 40, "zzz")]
        from cleval.dataio import Corpus, ImageAnnotations
        corpus = Corpus(images={"img_1": ImageAnnotations(gts=gts, dets=dets)})
        report = run_baseline(corpus, RunConfig(mode="det"))
        assert report.iou_recall == 1.0
        assert report.iou_precision == 1.0
