"""Match ground-truth and detection boxes through character inclusion.

A detection becomes a candidate for a ground truth as soon as it contains
one of its pseudo-character centers. Candidates are then gated on area
precision: detections that are mostly non-text (covered fraction at or
below the threshold) lose all their flags and end up as false positives.
The surviving flags are summarized into the per-row/per-column statistics
that the scoring stage consumes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .geometry import BOUNDARY_TOL, area, bounding_box, contains, union_intersection_area
from .pcc import PccSet

if TYPE_CHECKING:
    from .dataio import WordInstance

DEFAULT_AREA_PRECISION_THRESHOLD = 0.5


@dataclass
class MatchTable:
    """Match flags for one image plus the statistics derived from them.

    ``candidate_flags[i][k]`` holds the detection indices whose region
    contains center k of ground truth i, before the area-precision gate;
    ``char_flags`` holds the same sets after it. The remaining fields are
    the row/column sums used by scoring: how many detections matched each
    ground truth (and vice versa), how many detections cover each single
    character, and how many characters each detection covers in total.
    """

    num_gts: int
    num_dets: int
    gt_lengths: list[int]
    candidate_flags: list[list[frozenset[int]]]
    char_flags: list[list[frozenset[int]]]
    area_precision: list[float]
    gt_matches: list[list[int]]
    det_matches: list[list[int]]
    gt_match_count: list[int]
    det_match_count: list[int]
    char_cover_count: list[list[int]]
    det_char_count: list[int]

    def box_flag(self, gt_index: int, det_index: int) -> int:
        return 1 if det_index in set(self.gt_matches[gt_index]) else 0

    def char_flag(self, gt_index: int, char_index: int, det_index: int) -> int:
        return 1 if det_index in self.char_flags[gt_index][char_index] else 0

    def matched_chars(self, gt_index: int, det_index: int) -> list[int]:
        """Character indices of one ground truth covered by one detection."""
        return [
            k
            for k, dets in enumerate(self.char_flags[gt_index])
            if det_index in dets
        ]


def char_inclusion_candidates(
    pccs: Sequence[PccSet], dets: Sequence["WordInstance"]
) -> list[list[set[int]]]:
    """Candidate flags: which detections contain each character center.

    Boundary contact counts as inclusion. A cheap bounding-box reject keeps
    the quadratic center-vs-detection scan fast on realistic layouts.
    """
    det_geoms = []
    for det in dets:
        min_x, min_y, max_x, max_y = bounding_box(det.region)
        det_geoms.append((
            det.region,
            min_x - BOUNDARY_TOL,
            min_y - BOUNDARY_TOL,
            max_x + BOUNDARY_TOL,
            max_y + BOUNDARY_TOL,
        ))
    flags: list[list[set[int]]] = []
    for pcc in pccs:
        rows: list[set[int]] = []
        for center in pcc.centers:
            hit: set[int] = set()
            for j, (region, x0, y0, x1, y1) in enumerate(det_geoms):
                if x0 <= center.x <= x1 and y0 <= center.y <= y1 and contains(region, center):
                    hit.add(j)
            rows.append(hit)
        flags.append(rows)
    return flags


def compute_area_precision(
    det: "WordInstance", candidate_gts: Sequence["WordInstance"]
) -> float:
    """Fraction of the detection's area covered by its candidate ground truths."""
    if not candidate_gts:
        return 0.0
    covered = union_intersection_area(det.region, [g.region for g in candidate_gts])
    value = covered / area(det.region)
    return max(0.0, min(1.0, value))


def finalize_matches(
    candidates: Sequence[Sequence[set[int]]],
    area_precisions: Sequence[float],
    threshold: float = DEFAULT_AREA_PRECISION_THRESHOLD,
) -> MatchTable:
    """Apply the area-precision gate and populate all summary statistics.

    A detection keeps its candidate flags only when its area precision is
    strictly above the threshold.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("area precision threshold must be in (0, 1)")
    num_gts = len(candidates)
    num_dets = len(area_precisions)
    passed = [ap > threshold for ap in area_precisions]

    candidate_flags = [
        [frozenset(dets) for dets in rows] for rows in candidates
    ]
    char_flags = [
        [frozenset(j for j in dets if passed[j]) for dets in rows]
        for rows in candidates
    ]

    gt_matches: list[list[int]] = []
    det_match_sets: list[set[int]] = [set() for _ in range(num_dets)]
    det_char_count = [0] * num_dets
    char_cover_count: list[list[int]] = []
    for i, rows in enumerate(char_flags):
        matched: set[int] = set()
        covers: list[int] = []
        for dets in rows:
            covers.append(len(dets))
            matched.update(dets)
            for j in dets:
                det_char_count[j] += 1
        for j in matched:
            det_match_sets[j].add(i)
        gt_matches.append(sorted(matched))
        char_cover_count.append(covers)
    det_matches = [sorted(s) for s in det_match_sets]

    return MatchTable(
        num_gts=num_gts,
        num_dets=num_dets,
        gt_lengths=[len(rows) for rows in char_flags],
        candidate_flags=candidate_flags,
        char_flags=char_flags,
        area_precision=list(area_precisions),
        gt_matches=gt_matches,
        det_matches=det_matches,
        gt_match_count=[len(m) for m in gt_matches],
        det_match_count=[len(m) for m in det_matches],
        char_cover_count=char_cover_count,
        det_char_count=det_char_count,
    )


def build_match_table(
    gts: Sequence["WordInstance"],
    pccs: Sequence[PccSet],
    dets: Sequence["WordInstance"],
    threshold: float = DEFAULT_AREA_PRECISION_THRESHOLD,
) -> MatchTable:
    """Run the full candidate -> area precision -> final flags pipeline."""
    if len(gts) != len(pccs):
        raise ValueError("one PccSet per ground truth is required")
    candidates = char_inclusion_candidates(pccs, dets)
    candidate_gts: list[set[int]] = [set() for _ in range(len(dets))]
    for i, rows in enumerate(candidates):
        for dets_for_char in rows:
            for j in dets_for_char:
                candidate_gts[j].add(i)
    area_precisions = [
        compute_area_precision(det, [gts[i] for i in sorted(candidate_gts[j])])
        for j, det in enumerate(dets)
    ]
    return finalize_matches(candidates, area_precisions, threshold)
