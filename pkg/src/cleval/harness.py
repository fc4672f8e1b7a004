"""Synthetic perturbations and the box-overlap / exact-match baselines.

The perturbations derive detection corpora from a ground-truth corpus:
geometric kinds (crop, split, overlap) reshape boxes along the reading
axis and keep transcriptions, textual kinds (insert, delete, replace)
apply seeded random character edits and keep geometry. The baselines are
the classic greedy one-to-one IoU assignment and, on top of its matches,
exact transcription comparison.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from typing import Sequence

from .dataio import Corpus, WordInstance
from .geometry import Point, Region, area, intersection_area
from .scoring import hmean

GEOMETRIC_KINDS = ("crop", "split", "overlap")
TEXTUAL_KINDS = ("insert", "delete", "replace")
EDIT_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


@dataclass(frozen=True)
class Perturbation:
    """One synthetic-corpus transform: kind, magnitude, and RNG seed."""

    kind: str
    magnitude: float | int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in GEOMETRIC_KINDS + TEXTUAL_KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "crop":
            if not 0.0 < float(self.magnitude) <= 1.0:
                raise ValueError("crop ratio must be in (0, 1]")
        elif self.kind == "split":
            if int(self.magnitude) != self.magnitude or int(self.magnitude) < 2:
                raise ValueError("split count must be an integer >= 2")
        elif self.kind == "overlap":
            if not 0.0 <= float(self.magnitude) < 1.0:
                raise ValueError("overlap ratio must be in [0, 1)")
        else:
            if int(self.magnitude) != self.magnitude or int(self.magnitude) < 1:
                raise ValueError("edit count must be an integer >= 1")


def _lerp(a: Point, b: Point, t: float) -> Point:
    return Point((1.0 - t) * a.x + t * b.x, (1.0 - t) * a.y + t * b.y)


def _sub_quad(region: Region, f0: float, f1: float) -> Region:
    """Portion of a quad between width fractions f0 and f1 (reading axis)."""
    v1, v2, v3, v4 = region.vertices
    return Region(
        (
            _lerp(v1, v2, f0),
            _lerp(v1, v2, f1),
            _lerp(v4, v3, f1),
            _lerp(v4, v3, f0),
        ),
        "quad",
    )


def _instance_rng(seed: int, image_id: str, index: int) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{image_id}:{index}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _edit_text(text: str, p: Perturbation, rng: random.Random) -> str:
    count = int(p.magnitude)
    if p.kind == "insert":
        chars = list(text)
        for _ in range(count):
            pos = rng.randrange(len(chars) + 1)
            chars.insert(pos, rng.choice(EDIT_ALPHABET))
        return "".join(chars)
    if p.kind == "delete":
        removable = min(count, len(text))
        doomed = set(rng.sample(range(len(text)), removable)) if removable else set()
        return "".join(ch for i, ch in enumerate(text) if i not in doomed)
    # replace: never re-insert the character being replaced
    chars = list(text)
    targets = rng.sample(range(len(chars)), min(count, len(chars)))
    for pos in targets:
        current = chars[pos].lower()
        choices = [c for c in EDIT_ALPHABET if c != current]
        chars[pos] = rng.choice(choices)
    return "".join(chars)


def perturb_instance(gt: WordInstance, p: Perturbation,
                     rng: random.Random) -> list[WordInstance]:
    """Synthetic detections for one ground truth."""
    if p.kind in GEOMETRIC_KINDS:
        if gt.region.kind != "quad":
            raise ValueError(
                "geometric perturbations require quad ground truths "
                f"(image '{gt.image_id}', line {gt.source_line})"
            )
        if p.kind == "crop":
            regions = [_sub_quad(gt.region, 0.0, float(p.magnitude))]
        elif p.kind == "split":
            n = int(p.magnitude)
            regions = [_sub_quad(gt.region, b / n, (b + 1) / n) for b in range(n)]
        else:
            half = (1.0 + float(p.magnitude)) / 2.0
            regions = [
                _sub_quad(gt.region, 0.0, half),
                _sub_quad(gt.region, 1.0 - half, 1.0),
            ]
        return [replace(gt, region=region, dont_care=False) for region in regions]
    return [replace(gt, text=_edit_text(gt.text or "", p, rng), dont_care=False)]


def perturb_corpus(gts: Corpus | dict[str, list[WordInstance]],
                   p: Perturbation) -> dict[str, list[WordInstance]]:
    """Derive a synthetic detection map from a ground-truth corpus.

    Don't-care ground truths produce no detections. Deterministic for a
    fixed (corpus, kind, magnitude, seed): every instance gets its own RNG
    keyed on the seed, image id, and instance index.
    """
    gt_map = (
        {image_id: ann.gts for image_id, ann in gts.images.items()}
        if isinstance(gts, Corpus)
        else gts
    )
    out: dict[str, list[WordInstance]] = {}
    for image_id in sorted(gt_map):
        dets: list[WordInstance] = []
        for index, gt in enumerate(gt_map[image_id]):
            if gt.dont_care:
                continue
            rng = _instance_rng(p.seed, image_id, index)
            dets.extend(perturb_instance(gt, p, rng))
        out[image_id] = dets
    return out


def iou(a: Region, b: Region) -> float:
    """Intersection over union of two regions."""
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    if union <= 0.0:
        return 0.0
    return max(0.0, min(1.0, inter / union))


@dataclass
class IouImageResult:
    """Greedy one-to-one assignment for a single image."""

    pairs: list[tuple[int, int, float]]
    num_gt: int
    num_det: int

    @property
    def true_positives(self) -> int:
        return len(self.pairs)


def iou_metric(gts: Sequence[WordInstance], dets: Sequence[WordInstance],
               threshold: float = 0.5) -> IouImageResult:
    """One-to-one matching: pairs strictly above the threshold, best first.

    Ties at exactly the threshold are rejected; candidate order is by
    descending overlap, then ground-truth index, then detection index.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("IoU threshold must be in (0, 1)")
    candidates = []
    for i, gt in enumerate(gts):
        for j, det in enumerate(dets):
            value = iou(gt.region, det.region)
            if value > threshold:
                candidates.append((-value, i, j))
    candidates.sort()
    taken_gt: set[int] = set()
    taken_det: set[int] = set()
    pairs = []
    for neg_value, i, j in candidates:
        if i in taken_gt or j in taken_det:
            continue
        taken_gt.add(i)
        taken_det.add(j)
        pairs.append((i, j, -neg_value))
    return IouImageResult(pairs=pairs, num_gt=len(gts), num_det=len(dets))


def iou_scores(gts: Sequence[WordInstance], dets: Sequence[WordInstance],
               threshold: float = 0.5) -> tuple[float, float, float]:
    """(recall, precision, hmean) of the one-to-one assignment."""
    result = iou_metric(gts, dets, threshold)
    recall = result.true_positives / result.num_gt if result.num_gt else 0.0
    precision = result.true_positives / result.num_det if result.num_det else 0.0
    return recall, precision, hmean(recall, precision)


def crw_metric(gts: Sequence[WordInstance], dets: Sequence[WordInstance],
               iou_pairs: Sequence[tuple[int, int, float]],
               case_sensitive: bool = False) -> int:
    """Count matched pairs whose transcriptions are exactly equal."""

    def norm(text: str | None) -> str:
        text = text or ""
        return text if case_sensitive else text.lower()

    return sum(
        1 for i, j, _ in iou_pairs if norm(gts[i].text) == norm(dets[j].text)
    )


def crw_scores(gts: Sequence[WordInstance], dets: Sequence[WordInstance],
               iou_pairs: Sequence[tuple[int, int, float]],
               case_sensitive: bool = False) -> tuple[float, float]:
    """Exact-match fractions over ground truths and over detections."""
    correct = crw_metric(gts, dets, iou_pairs, case_sensitive)
    recall_form = correct / len(gts) if gts else 0.0
    precision_form = correct / len(dets) if dets else 0.0
    return recall_form, precision_form


@dataclass
class BaselineImageReport:
    image_id: str
    true_positives: int
    num_gt: int
    num_det: int
    crw_correct: int | None = None


@dataclass
class BaselineReport:
    """Corpus-level IoU scores, with exact-match scores in e2e mode."""

    mode: str
    iou_recall: float
    iou_precision: float
    iou_hmean: float
    crw_recall: float | None = None
    crw_precision: float | None = None
    crw_hmean: float | None = None
    per_image: list[BaselineImageReport] = field(default_factory=list)


def aggregate_baseline(per_image: Sequence[BaselineImageReport],
                       mode: str) -> BaselineReport:
    """Sum per-image counts into corpus-level recall/precision/hmean."""
    tp = sum(img.true_positives for img in per_image)
    num_gt = sum(img.num_gt for img in per_image)
    num_det = sum(img.num_det for img in per_image)
    iou_recall = tp / num_gt if num_gt > 0 else 0.0
    iou_precision = tp / num_det if num_det > 0 else 0.0
    report = BaselineReport(
        mode=mode,
        iou_recall=iou_recall,
        iou_precision=iou_precision,
        iou_hmean=hmean(iou_recall, iou_precision),
        per_image=list(per_image),
    )
    if mode == "e2e":
        correct = sum(img.crw_correct or 0 for img in per_image)
        report.crw_recall = correct / num_gt if num_gt > 0 else 0.0
        report.crw_precision = correct / num_det if num_det > 0 else 0.0
        report.crw_hmean = hmean(report.crw_recall, report.crw_precision)
    return report
