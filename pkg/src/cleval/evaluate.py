"""Corpus evaluation: per-image pipeline, parallel fan-out, aggregation.

Images are independent, so they can be scored in any number of worker
processes; results are always reduced in image-id order, which makes the
final report identical whatever the job count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .dataio import Corpus, WordInstance, apply_dont_care
from .harness import (
    BaselineImageReport,
    aggregate_baseline,
    crw_metric,
    iou_metric,
)
from .matching import build_match_table
from .pcc import pcc_for_region
from .scoring import (
    Attributes,
    EvalReport,
    ImageReport,
    MODE_DETECTION,
    MODE_END_TO_END,
    attribute_counters,
    hmean,
    score_detection,
    score_end_to_end,
)

# Process-pool startup is not worth it below this corpus size.
_AUTO_PARALLEL_MIN_IMAGES = 64

_MODE_ALIASES = {
    "det": MODE_DETECTION,
    "detection": MODE_DETECTION,
    "e2e": MODE_END_TO_END,
}


def normalize_mode(mode: str) -> str:
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected det or e2e") from None


@dataclass
class RunConfig:
    """Everything one reproducible evaluation run depends on."""

    gt_path: str | Path | None = None
    det_path: str | Path | None = None
    mode: str = MODE_DETECTION
    ap_threshold: float = 0.5
    case_sensitive: bool = False
    dont_care_fraction: float = 0.5
    output: str | Path | None = None
    format: str = "json"
    per_sample: bool = False
    jobs: int = 0

    def __post_init__(self) -> None:
        self.mode = normalize_mode(self.mode)
        if not 0.0 < self.ap_threshold < 1.0:
            raise ValueError("ap_threshold must be in (0, 1)")
        if not 0.0 < self.dont_care_fraction < 1.0:
            raise ValueError("dont_care_fraction must be in (0, 1)")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown output format {self.format!r}")
        if self.jobs < 0:
            raise ValueError("jobs must be >= 0")


def evaluate_image(
    image_id: str,
    gts: Sequence[WordInstance],
    dets: Sequence[WordInstance],
    mode: str = MODE_DETECTION,
    ap_threshold: float = 0.5,
    case_sensitive: bool = False,
    dont_care_fraction: float = 0.5,
) -> ImageReport:
    """Match and score a single image."""
    mode = normalize_mode(mode)
    kept_gts, kept_dets, dc_count, absorbed = apply_dont_care(
        gts, dets, dont_care_fraction
    )
    pccs = [pcc_for_region(gt.region, gt.length, gt) for gt in kept_gts]
    table = build_match_table(kept_gts, pccs, kept_dets, ap_threshold)
    if mode == MODE_END_TO_END:
        scores = score_end_to_end(table, kept_gts, kept_dets, case_sensitive)
    else:
        scores = score_detection(table, kept_gts, kept_dets)
    attributes = attribute_counters(table, kept_dets, mode)

    matched_gts = sum(1 for count in table.gt_match_count if count > 0)
    matched_dets = sum(1 for count in table.det_match_count if count > 0)
    return ImageReport(
        image_id=image_id,
        recall_num=sum(s.numerator for s in scores.gt_scores),
        recall_den=sum(s.total_num for s in scores.gt_scores),
        precision_num=sum(s.numerator for s in scores.det_scores),
        precision_den=sum(s.total_num for s in scores.det_scores),
        rs_num=scores.rs_num,
        rs_den=scores.rs_den,
        attributes=attributes,
        num_gt=len(gts),
        num_gt_dont_care=dc_count,
        num_gt_matched=matched_gts,
        num_gt_missed=len(kept_gts) - matched_gts,
        num_det=len(dets),
        num_det_absorbed=absorbed,
        num_det_matched=matched_dets,
        num_det_fp=len(kept_dets) - matched_dets,
    )


def _image_task(payload: tuple) -> ImageReport:
    image_id, gts, dets, mode, ap_threshold, case_sensitive, dc_fraction = payload
    return evaluate_image(
        image_id, gts, dets,
        mode=mode,
        ap_threshold=ap_threshold,
        case_sensitive=case_sensitive,
        dont_care_fraction=dc_fraction,
    )


def _resolve_jobs(jobs: int, num_images: int) -> int:
    if jobs == 1 or num_images <= 1:
        return 1
    if jobs == 0:
        if num_images < _AUTO_PARALLEL_MIN_IMAGES:
            return 1
        return os.cpu_count() or 1
    return jobs


def evaluate_corpus(corpus: Corpus, config: RunConfig | None = None) -> EvalReport:
    """Evaluate a whole corpus and aggregate per-image reports.

    Aggregation adds numerators and denominators (never averages of
    ratios) in sorted image-id order, so results do not depend on worker
    scheduling.
    """
    config = config or RunConfig()
    image_ids = sorted(corpus.images)
    payloads = [
        (
            image_id,
            corpus.images[image_id].gts,
            corpus.images[image_id].dets,
            config.mode,
            config.ap_threshold,
            config.case_sensitive,
            config.dont_care_fraction,
        )
        for image_id in image_ids
    ]
    jobs = _resolve_jobs(config.jobs, len(payloads))
    if jobs <= 1:
        reports = [_image_task(payload) for payload in payloads]
    else:
        chunk = max(1, len(payloads) // (jobs * 4))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_image_task, payloads, chunksize=chunk))

    recall_num = sum(r.recall_num for r in reports)
    recall_den = sum(r.recall_den for r in reports)
    precision_num = sum(r.precision_num for r in reports)
    precision_den = sum(r.precision_den for r in reports)
    attributes = Attributes()
    for r in reports:
        attributes = attributes + r.attributes

    warnings: list[str] = []
    recall = recall_num / recall_den if recall_den > 0 else 0.0
    precision = precision_num / precision_den if precision_den > 0 else 0.0
    if recall_den <= 0:
        warnings.append("no ground-truth characters to score; recall set to 0")
    if precision_den <= 0:
        warnings.append("no detection characters to score; precision set to 0")

    rs = rs_num = rs_den = None
    if config.mode == MODE_END_TO_END:
        rs_num = sum(r.rs_num or 0.0 for r in reports)
        rs_den = sum(r.rs_den or 0.0 for r in reports)
        rs = rs_num / rs_den if rs_den > 0 else 0.0
        if rs_den <= 0:
            warnings.append("no matched detections; recognition score set to 0")

    return EvalReport(
        mode=config.mode,
        recall=recall,
        precision=precision,
        hmean=hmean(recall, precision),
        rs=rs,
        attributes=attributes,
        per_image=reports,
        recall_num=recall_num,
        recall_den=recall_den,
        precision_num=precision_num,
        precision_den=precision_den,
        rs_num=rs_num,
        rs_den=rs_den,
        warnings=warnings,
    )


def run_baseline(corpus: Corpus, config: RunConfig | None = None,
                 iou_threshold: float = 0.5):
    """IoU (and, in e2e mode, exact-match) baseline over a corpus.

    Uses the same don't-care policy as the main metric so the two reports
    are comparable side by side.
    """
    config = config or RunConfig()
    per_image = []
    for image_id in sorted(corpus.images):
        ann = corpus.images[image_id]
        kept_gts, kept_dets, _, _ = apply_dont_care(
            ann.gts, ann.dets, config.dont_care_fraction
        )
        result = iou_metric(kept_gts, kept_dets, iou_threshold)
        crw_correct = None
        if config.mode == MODE_END_TO_END:
            crw_correct = crw_metric(
                kept_gts, kept_dets, result.pairs, config.case_sensitive
            )
        per_image.append(BaselineImageReport(
            image_id=image_id,
            true_positives=result.true_positives,
            num_gt=result.num_gt,
            num_det=result.num_det,
            crw_correct=crw_correct,
        ))
    return aggregate_baseline(per_image, config.mode)
