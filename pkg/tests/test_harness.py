"""Synthetic perturbations and the IoU / exact-match baselines."""

from __future__ import annotations

import pytest

from cleval import (
    Perturbation,
    crw_metric,
    crw_scores,
    iou,
    iou_metric,
    iou_scores,
    perturb_corpus,
)
from cleval.harness import perturb_instance, _instance_rng

from helpers import box_word, grid_corpus, rect


class TestPerturbationValidation:
    @pytest.mark.parametrize("kind,magnitude", [
        ("crop", 0.0), ("crop", 1.5),
        ("split", 1), ("split", 2.5),
        ("overlap", 1.0), ("overlap", -0.1),
        ("insert", 0), ("delete", 0.5),
    ])
    def test_invalid_magnitudes(self, kind, magnitude):
        with pytest.raises(ValueError):
            Perturbation(kind, magnitude)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Perturbation("rotate", 0.5)


class TestGeometricPerturbations:
    def test_crop_full_width_is_identity(self):
        corpus = grid_corpus(num_images=1, words_per_image=2)
        det_map = perturb_corpus(corpus, Perturbation("crop", 1.0))
        for image_id, dets in det_map.items():
            gts = corpus.images[image_id].gts
            assert len(dets) == len(gts)
            for det, gt in zip(dets, gts):
                assert [tuple(p) for p in det.region.vertices] == \
                    [tuple(p) for p in gt.region.vertices]
                assert det.text == gt.text

    def test_split_two_equal_boxes(self):
        gt = box_word(0, 0, 6, 2, "AB")
        rng = _instance_rng(0, "img_1", 0)
        pieces = perturb_instance(gt, Perturbation("split", 2), rng)
        assert [tuple(p) for p in pieces[0].region.vertices] == [
            (0.0, 0.0), (3.0, 0.0), (3.0, 2.0), (0.0, 2.0)
        ]
        assert [tuple(p) for p in pieces[1].region.vertices] == [
            (3.0, 0.0), (6.0, 0.0), (6.0, 2.0), (3.0, 2.0)
        ]

    def test_overlap_shares_middle_fraction(self):
        gt = box_word(0, 0, 100, 10, "ABCDEFGHIJ")
        rng = _instance_rng(0, "img_1", 0)
        first, second = perturb_instance(gt, Perturbation("overlap", 0.2), rng)
        assert first.region.vertices[1].x == pytest.approx(60.0)
        assert second.region.vertices[0].x == pytest.approx(40.0)

    def test_geometric_kinds_keep_text(self):
        gt = box_word(0, 0, 6, 2, "AB")
        rng = _instance_rng(0, "img_1", 0)
        for p in (Perturbation("crop", 0.5), Perturbation("split", 3),
                  Perturbation("overlap", 0.1)):
            for det in perturb_instance(gt, p, rng):
                assert det.text == "AB"

    def test_polygon_gt_rejected(self):
        from cleval import WordInstance, make_region
        poly = make_region([(0, 0), (3, 0), (6, 0), (6, 2), (3, 2), (0, 2)],
                           "polygon")
        gt = WordInstance(poly, "ABC", False, "img_1", 1)
        rng = _instance_rng(0, "img_1", 0)
        with pytest.raises(ValueError, match="quad"):
            perturb_instance(gt, Perturbation("crop", 0.5), rng)

    def test_dont_care_gts_produce_no_detections(self):
        corpus = grid_corpus(num_images=1, words_per_image=1)
        corpus.images["img_0000"].gts.append(
            box_word(0, 500, 60, 510, "###", "img_0000", dont_care=True)
        )
        det_map = perturb_corpus(corpus, Perturbation("split", 2))
        assert len(det_map["img_0000"]) == 2  # only the real word, split in two


class TestTextPerturbations:
    def test_delete_one_from_walk(self):
        gt = box_word(0, 0, 40, 10, "WALK")
        for seed in range(6):
            rng = _instance_rng(seed, "img_1", 0)
            (det,) = perturb_instance(gt, Perturbation("delete", 1), rng)
            assert det.text in {"ALK", "WLK", "WAK", "WAL"}
            rng2 = _instance_rng(seed, "img_1", 0)
            (again,) = perturb_instance(gt, Perturbation("delete", 1), rng2)
            assert again.text == det.text

    def test_delete_more_than_length_empties_text(self):
        gt = box_word(0, 0, 40, 10, "AB")
        rng = _instance_rng(1, "img_1", 0)
        (det,) = perturb_instance(gt, Perturbation("delete", 5), rng)
        assert det.text == ""

    def test_insert_adds_lowercase_or_digit(self):
        gt = box_word(0, 0, 40, 10, "WALK")
        rng = _instance_rng(3, "img_1", 0)
        (det,) = perturb_instance(gt, Perturbation("insert", 2), rng)
        assert len(det.text) == 6
        added = [c for c in det.text if c not in "WALK"]
        assert all(c in "abcdefghijklmnopqrstuvwxyz0123456789" for c in added)

    def test_replace_changes_exactly_k_positions(self):
        gt = box_word(0, 0, 40, 10, "WALK")
        rng = _instance_rng(5, "img_1", 0)
        (det,) = perturb_instance(gt, Perturbation("replace", 2), rng)
        assert len(det.text) == 4
        changed = sum(1 for a, b in zip("WALK", det.text) if a.lower() != b.lower())
        assert changed == 2

    def test_textual_kinds_keep_geometry(self):
        corpus = grid_corpus(num_images=1, words_per_image=2)
        det_map = perturb_corpus(corpus, Perturbation("replace", 1, seed=3))
        for det, gt in zip(det_map["img_0000"], corpus.images["img_0000"].gts):
            assert [tuple(p) for p in det.region.vertices] == \
                [tuple(p) for p in gt.region.vertices]

    def test_deterministic_given_seed(self):
        corpus = grid_corpus(num_images=2, words_per_image=3)
        first = perturb_corpus(corpus, Perturbation("insert", 2, seed=11))
        second = perturb_corpus(corpus, Perturbation("insert", 2, seed=11))
        other_seed = perturb_corpus(corpus, Perturbation("insert", 2, seed=12))
        assert {k: [d.text for d in v] for k, v in first.items()} == \
            {k: [d.text for d in v] for k, v in second.items()}
        assert {k: [d.text for d in v] for k, v in first.items()} != \
            {k: [d.text for d in v] for k, v in other_seed.items()}


class TestIouBaseline:
    def test_identity_all_matched(self):
        gts = [box_word(0, 0, 60, 10, "ABCDEF"), box_word(0, 30, 60, 40, "XYZXYZ")]
        result = iou_metric(gts, list(gts))
        assert result.true_positives == 2
        assert iou_scores(gts, list(gts)) == (1.0, 1.0, 1.0)

    def test_exact_half_boxes_do_not_match(self):
        # split-in-two halves overlap exactly 0.5, strict gate rejects both
        gts = [box_word(0, 0, 60, 10, "ABCDEF")]
        dets = [box_word(0, 0, 30, 10, None), box_word(30, 0, 60, 10, None)]
        assert iou(gts[0].region, dets[0].region) == 0.5
        result = iou_metric(gts, dets)
        assert result.true_positives == 0

    def test_crop_sixty_percent_matches(self):
        gts = [box_word(0, 0, 100, 10, "ABCDEFGHIJ")]
        dets = [box_word(0, 0, 60, 10, None)]
        assert iou(gts[0].region, dets[0].region) == pytest.approx(0.6)
        result = iou_metric(gts, dets)
        assert result.true_positives == 1

    def test_one_to_one_assignment_is_exclusive(self):
        gts = [box_word(0, 0, 60, 10, "ABCDEF")]
        dets = [box_word(0, 0, 60, 10, None), box_word(1, 0, 61, 10, None)]
        result = iou_metric(gts, dets)
        assert result.true_positives == 1
        assert result.pairs[0][1] == 0  # best overlap wins

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            iou_metric([], [], threshold=0.0)


class TestCrwBaseline:
    def test_perfect(self):
        gts = [box_word(0, 0, 60, 10, "ABCDEF")]
        result = iou_metric(gts, gts)
        assert crw_metric(gts, gts, result.pairs) == 1

    def test_one_deleted_character_scores_zero(self):
        gts = [box_word(0, 0, 60, 10, "ABCDEF")]
        dets = [box_word(0, 0, 60, 10, "ABCDE")]
        result = iou_metric(gts, dets)
        assert result.true_positives == 1
        assert crw_metric(gts, dets, result.pairs) == 0

    def test_half_the_texts_perturbed(self):
        gts = [box_word(0, y, 60, y + 10, text)
               for y, text in ((0, "AAA"), (30, "BBB"), (60, "CCC"), (90, "DDD"))]
        dets = [box_word(0, 0, 60, 10, "AAA"), box_word(0, 30, 60, 40, "BBB"),
                box_word(0, 60, 60, 70, "CCx"), box_word(0, 90, 60, 100, "DDx")]
        result = iou_metric(gts, dets)
        correct = crw_metric(gts, dets, result.pairs)
        assert correct / result.num_gt == 0.5
        assert crw_scores(gts, dets, result.pairs) == (0.5, 0.5)

    def test_case_policy(self):
        gts = [box_word(0, 0, 60, 10, "WALK")]
        dets = [box_word(0, 0, 60, 10, "walk")]
        pairs = iou_metric(gts, dets).pairs
        assert crw_metric(gts, dets, pairs) == 1
        assert crw_metric(gts, dets, pairs, case_sensitive=True) == 0
