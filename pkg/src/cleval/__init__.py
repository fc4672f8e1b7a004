"""Character-level evaluation of text detection and recognition outputs."""

from .dataio import (
    Corpus,
    CorpusError,
    ImageAnnotations,
    WordInstance,
    apply_dont_care,
    emit_baseline_report,
    emit_report,
    load_corpus,
    load_gt_map,
)
from .evaluate import RunConfig, evaluate_corpus, evaluate_image, run_baseline
from .geometry import (
    GeometryError,
    Point,
    Region,
    area,
    contains,
    intersection_area,
    is_simple,
    make_region,
    min_max_side,
    union_intersection_area,
)
from .harness import (
    BaselineReport,
    Perturbation,
    crw_metric,
    crw_scores,
    iou,
    iou_metric,
    iou_scores,
    perturb_corpus,
)
from .matching import MatchTable, build_match_table
from .pcc import PccSet, interpolate_polyline, pcc_for_region, pcc_polygon, pcc_quad
from .scoring import (
    Attributes,
    EvalReport,
    ImageReport,
    InstanceScore,
    aggregate,
    granularity_penalty,
    hmean,
    lcs,
    recognition_score,
    sesp,
)

__version__ = "0.1.0"

__all__ = [
    "Attributes",
    "BaselineReport",
    "Corpus",
    "CorpusError",
    "EvalReport",
    "GeometryError",
    "ImageAnnotations",
    "ImageReport",
    "InstanceScore",
    "MatchTable",
    "PccSet",
    "Perturbation",
    "Point",
    "Region",
    "RunConfig",
    "WordInstance",
    "aggregate",
    "apply_dont_care",
    "area",
    "build_match_table",
    "contains",
    "crw_metric",
    "crw_scores",
    "emit_baseline_report",
    "emit_report",
    "evaluate_corpus",
    "evaluate_image",
    "granularity_penalty",
    "hmean",
    "interpolate_polyline",
    "intersection_area",
    "iou",
    "iou_metric",
    "iou_scores",
    "is_simple",
    "lcs",
    "load_corpus",
    "load_gt_map",
    "make_region",
    "min_max_side",
    "pcc_for_region",
    "pcc_polygon",
    "pcc_quad",
    "perturb_corpus",
    "recognition_score",
    "run_baseline",
    "sesp",
    "union_intersection_area",
]
