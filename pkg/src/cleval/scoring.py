"""Character-level scoring on top of a match table.

Every instance contributes a (correct - penalty) / total fraction; recall
sums these over ground truths, precision over detections, and the corpus
score divides summed numerators by summed denominators rather than
averaging per-instance ratios. Detection mode counts covered character
centers; end-to-end mode counts common-subsequence characters between the
transcriptions, eliminating matched characters so nothing is credited
twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .geometry import min_max_side
from .matching import MatchTable

if TYPE_CHECKING:
    from .dataio import WordInstance

MODE_DETECTION = "detection"
MODE_END_TO_END = "e2e"


@dataclass(frozen=True)
class InstanceScore:
    """Numerator/denominator contribution of a single box."""

    correct_num: float
    granul_penalty: int
    total_num: float

    @property
    def numerator(self) -> float:
        # A box never scores below zero, however many times it was split.
        return max(self.correct_num - self.granul_penalty, 0.0)


@dataclass
class Attributes:
    """Diagnostic counters: box granularity and character-level defects."""

    split: int = 0
    merge: int = 0
    miss: int = 0
    overlap: int = 0
    fp_chars: int = 0

    def __add__(self, other: "Attributes") -> "Attributes":
        return Attributes(
            self.split + other.split,
            self.merge + other.merge,
            self.miss + other.miss,
            self.overlap + other.overlap,
            self.fp_chars + other.fp_chars,
        )


@dataclass
class ImageReport:
    """Per-image numerators/denominators plus instance accounting."""

    image_id: str
    recall_num: float
    recall_den: float
    precision_num: float
    precision_den: float
    rs_num: float | None
    rs_den: float | None
    attributes: Attributes
    num_gt: int
    num_gt_dont_care: int
    num_gt_matched: int
    num_gt_missed: int
    num_det: int
    num_det_absorbed: int
    num_det_matched: int
    num_det_fp: int

    @property
    def recall(self) -> float:
        return self.recall_num / self.recall_den if self.recall_den > 0 else 0.0

    @property
    def precision(self) -> float:
        return self.precision_num / self.precision_den if self.precision_den > 0 else 0.0

    @property
    def hmean(self) -> float:
        return hmean(self.recall, self.precision)

    @property
    def rs(self) -> float | None:
        if self.rs_num is None or self.rs_den is None:
            return None
        return self.rs_num / self.rs_den if self.rs_den > 0 else 0.0


@dataclass
class EvalReport:
    """Corpus-level scores, attribute counters, and per-image breakdown."""

    mode: str
    recall: float
    precision: float
    hmean: float
    rs: float | None
    attributes: Attributes
    per_image: list[ImageReport] = field(default_factory=list)
    recall_num: float = 0.0
    recall_den: float = 0.0
    precision_num: float = 0.0
    precision_den: float = 0.0
    rs_num: float | None = None
    rs_den: float | None = None
    warnings: list[str] = field(default_factory=list)


@dataclass
class ImageScores:
    """Instance scores for one image, plus recognition sums in e2e mode."""

    gt_scores: list[InstanceScore]
    det_scores: list[InstanceScore]
    rs_num: float | None = None
    rs_den: float | None = None


def lcs_pairs(a: str, b: str) -> list[tuple[int, int]]:
    """Index pairs of one longest common subsequence of ``a`` and ``b``.

    Deterministic: among all optimal subsequences, matches are placed at
    the earliest possible positions of ``a`` (a forward walk over the
    suffix-length table; equal characters are always taken).
    """
    m, n = len(a), len(b)
    if m == 0 or n == 0:
        return []
    suffix = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        row = suffix[i]
        below = suffix[i + 1]
        ai = a[i]
        for j in range(n - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                down = below[j]
                right = row[j + 1]
                row[j] = down if down >= right else right
    pairs: list[tuple[int, int]] = []
    i = j = 0
    while i < m and j < n and suffix[i][j] > 0:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif suffix[i][j + 1] == suffix[i][j]:
            j += 1
        else:
            i += 1
    return pairs


def lcs(a: str, b: str) -> str:
    """A longest common subsequence of two strings."""
    return "".join(a[i] for i, _ in lcs_pairs(a, b))


def granularity_penalty(match_count: int) -> int:
    """One character of penalty per extra matched box; none when unmatched."""
    return max(match_count - 1, 0)


def hmean(recall: float, precision: float) -> float:
    """Harmonic mean, 0 when both inputs are 0."""
    if recall + precision <= 0.0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


def detection_correct_nums(table: MatchTable) -> tuple[list[float], list[float]]:
    """Correct-character counts from center coverage (detection mode).

    A ground truth gets one point per covered center. A detection gets
    1 / cover_count per center it covers, so detections sharing a
    character split its credit instead of double counting it.
    """
    gt_correct = [
        float(sum(1 for count in covers if count >= 1))
        for covers in table.char_cover_count
    ]
    det_correct = [0.0] * table.num_dets
    for rows in table.char_flags:
        for dets in rows:
            if not dets:
                continue
            share = 1.0 / len(dets)
            for j in dets:
                det_correct[j] += share
    return gt_correct, det_correct


def sesp_det_order(table: MatchTable, gt_index: int) -> list[int]:
    """Matched detections of one ground truth, in reading order.

    Sorted by the covered character indices (lowest first, then the next
    ones), with remaining ties broken by detection input order.
    """
    return sorted(
        table.gt_matches[gt_index],
        key=lambda j: (tuple(table.matched_chars(gt_index, j)), j),
    )


def _remove_indices(text: str, used: set[int]) -> str:
    return "".join(ch for idx, ch in enumerate(text) if idx not in used)


def sesp(gt_text: str, det_texts: Sequence[str]) -> tuple[int, list[int], list[str]]:
    """Subsequence-elimination scoring for one ground truth.

    ``det_texts`` are the (possibly already partially consumed) texts of
    the matched detections in reading order. The concatenation is compared
    against the ground-truth text once; each detection then claims its
    share of that common subsequence, and claimed characters are removed
    from both the running subsequence and the detection's text so they
    cannot score again.

    Returns (ground-truth correct count, per-detection counts, leftover
    detection texts).
    """
    recog_text = "".join(det_texts)
    common_pairs = lcs_pairs(gt_text, recog_text)
    common = "".join(gt_text[i] for i, _ in common_pairs)
    correct_gt = len(common)
    contributions: list[int] = []
    remaining: list[str] = []
    for text in det_texts:
        pairs = lcs_pairs(common, text)
        contributions.append(len(pairs))
        common_used = {i for i, _ in pairs}
        text_used = {j for _, j in pairs}
        common = _remove_indices(common, common_used)
        remaining.append(_remove_indices(text, text_used))
    return correct_gt, contributions, remaining


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def fp_total_num(det: "WordInstance", mode: str) -> float:
    """Denominator for an unmatched detection.

    Detection mode estimates a character count from the box aspect ratio
    (long side over short side, rounded, at least 1); end-to-end mode uses
    the predicted text length.
    """
    if mode == MODE_END_TO_END:
        return float(len(det.text or ""))
    short, long_ = min_max_side(det.region)
    return float(max(1, _round_half_up(long_ / short)))


def score_detection(
    table: MatchTable,
    gts: Sequence["WordInstance"],
    dets: Sequence["WordInstance"],
) -> ImageScores:
    """Instance scores for detection mode."""
    gt_correct, det_correct = detection_correct_nums(table)
    gt_scores = [
        InstanceScore(
            correct_num=gt_correct[i],
            granul_penalty=granularity_penalty(table.gt_match_count[i]),
            total_num=float(table.gt_lengths[i]),
        )
        for i in range(table.num_gts)
    ]
    det_scores = []
    for j, det in enumerate(dets):
        if table.det_match_count[j] > 0:
            det_scores.append(InstanceScore(
                correct_num=det_correct[j],
                granul_penalty=granularity_penalty(table.det_match_count[j]),
                total_num=float(table.det_char_count[j]),
            ))
        else:
            det_scores.append(InstanceScore(0.0, 0, fp_total_num(det, MODE_DETECTION)))
    return ImageScores(gt_scores, det_scores)


def score_end_to_end(
    table: MatchTable,
    gts: Sequence["WordInstance"],
    dets: Sequence["WordInstance"],
    case_sensitive: bool = False,
) -> ImageScores:
    """Instance scores for end-to-end mode via subsequence elimination.

    Ground truths are processed in input order; each detection's text is
    consumed across all the ground truths it matched.
    """

    def norm(text: str | None) -> str:
        text = text or ""
        return text if case_sensitive else text.lower()

    remaining = [norm(det.text) for det in dets]
    det_correct = [0] * table.num_dets
    gt_scores = []
    for i, gt in enumerate(gts):
        ordered = sesp_det_order(table, i)
        if ordered:
            correct_gt, contributions, leftover = sesp(
                norm(gt.text), [remaining[j] for j in ordered]
            )
            for j, got, left in zip(ordered, contributions, leftover):
                det_correct[j] += got
                remaining[j] = left
        else:
            correct_gt = 0
        gt_scores.append(InstanceScore(
            correct_num=float(correct_gt),
            granul_penalty=granularity_penalty(table.gt_match_count[i]),
            total_num=float(gt.length),
        ))

    det_scores = []
    rs_num = 0.0
    rs_den = 0.0
    for j, det in enumerate(dets):
        text_len = float(det.length)
        if table.det_match_count[j] > 0:
            det_scores.append(InstanceScore(
                correct_num=float(det_correct[j]),
                granul_penalty=granularity_penalty(table.det_match_count[j]),
                total_num=text_len,
            ))
            rs_num += det_correct[j]
            rs_den += max(text_len, float(table.det_char_count[j]))
        else:
            det_scores.append(InstanceScore(0.0, 0, text_len))
    return ImageScores(gt_scores, det_scores, rs_num=rs_num, rs_den=rs_den)


def aggregate(
    gt_scores: Sequence[InstanceScore], det_scores: Sequence[InstanceScore]
) -> tuple[float, float, float]:
    """(recall, precision, hmean) from summed numerators and denominators."""
    recall_num = sum(s.numerator for s in gt_scores)
    recall_den = sum(s.total_num for s in gt_scores)
    precision_num = sum(s.numerator for s in det_scores)
    precision_den = sum(s.total_num for s in det_scores)
    recall = recall_num / recall_den if recall_den > 0 else 0.0
    precision = precision_num / precision_den if precision_den > 0 else 0.0
    return recall, precision, hmean(recall, precision)


def recognition_score(table: MatchTable, det_scores: Sequence[InstanceScore]) -> float:
    """Recognition quality over matched detections only.

    Unmatched detections are detection failures, not recognition failures,
    so they are excluded; granularity penalties do not apply. Each matched
    detection's denominator is its text length or its covered-center
    count, whichever is larger.
    """
    num = 0.0
    den = 0.0
    for j, score in enumerate(det_scores):
        if table.det_match_count[j] > 0:
            num += score.correct_num
            den += max(score.total_num, float(table.det_char_count[j]))
    return num / den if den > 0 else 0.0


def attribute_counters(
    table: MatchTable, dets: Sequence["WordInstance"], mode: str
) -> Attributes:
    """Count splits, merges, missed/overlapped characters, and FP length."""
    split = sum(max(count - 1, 0) for count in table.gt_match_count)
    merge = sum(max(count - 1, 0) for count in table.det_match_count)
    miss = sum(
        1 for covers in table.char_cover_count for count in covers if count == 0
    )
    overlap = sum(
        max(count - 1, 0) for covers in table.char_cover_count for count in covers
    )
    fp_chars = sum(
        int(fp_total_num(det, mode))
        for j, det in enumerate(dets)
        if table.det_match_count[j] == 0
    )
    return Attributes(split=split, merge=merge, miss=miss, overlap=overlap,
                      fp_chars=fp_chars)
