"""Corpus parsing, don't-care filtering, and report serialization.

Two input layouts are accepted: a directory of ICDAR-style ``.txt`` files
(one per image, each line ``x1,y1,...,transcription``) or a single JSON
file mapping image ids to ``gt``/``det`` instance lists. All validation
happens here so downstream stages can assume clean geometry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

from .geometry import Point, Region, _signed_area, area, is_simple, union_intersection_area
from .scoring import Attributes, EvalReport, ImageReport

if TYPE_CHECKING:
    from .harness import BaselineReport

DONT_CARE_TEXT = "###"
_FILE_PREFIXES = ("gt_", "res_", "det_")


class CorpusError(ValueError):
    """Invalid input data; carries file/line context when known."""

    def __init__(self, message: str, file: str | Path | None = None,
                 line: int | None = None):
        self.file = str(file) if file is not None else None
        self.line = line
        where = ""
        if self.file is not None:
            where = f"{self.file}:" if line is None else f"{self.file}:{line}:"
        super().__init__(f"{where} {message}".strip())


@dataclass(frozen=True)
class WordInstance:
    """One annotated or predicted text region."""

    region: Region
    text: str | None
    dont_care: bool
    image_id: str
    source_line: int = 0

    @property
    def length(self) -> int:
        """Character count of the transcription (Unicode code points)."""
        return len(self.text or "")


@dataclass
class ImageAnnotations:
    gts: list[WordInstance] = field(default_factory=list)
    dets: list[WordInstance] = field(default_factory=list)


@dataclass
class Corpus:
    """Ground truths and detections keyed by image id."""

    images: dict[str, ImageAnnotations] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.images)


def _parse_coordinate(token: str) -> float | None:
    try:
        value = float(token)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _validate_region(points: list[Point], kind: str, file: str | Path | None,
                     line: int | None) -> Region:
    region = Region(tuple(points), kind)
    if not is_simple(region):
        raise CorpusError("self-intersecting region", file, line)
    if abs(_signed_area([(p.x, p.y) for p in points])) <= 1e-12:
        raise CorpusError("zero-area region", file, line)
    return region


def parse_annotation_line(raw: str, *, role: str, mode: str, image_id: str,
                          file: str | Path | None = None,
                          line: int = 0) -> WordInstance | None:
    """Parse one annotation line; returns None for blank lines.

    The leading maximal even run of numeric fields is the coordinate list
    (8 for a quad, more for a polygon); everything after it, commas
    included, is the transcription.
    """
    text_line = raw.rstrip("\r\n")
    if not text_line.strip():
        return None
    fields = text_line.split(",")
    numeric_run = 0
    values: list[float] = []
    for token in fields:
        value = _parse_coordinate(token.strip())
        if value is None:
            break
        values.append(value)
        numeric_run += 1
    coord_count = numeric_run if numeric_run % 2 == 0 else numeric_run - 1
    if coord_count < 8:
        raise CorpusError(
            f"expected at least 8 comma-separated coordinates, found {numeric_run}",
            file, line,
        )
    kind = "quad" if coord_count == 8 else "polygon"
    points = [
        Point(values[i], values[i + 1]) for i in range(0, coord_count, 2)
    ]
    if role == "gt" and kind == "polygon" and len(points) % 2 != 0:
        raise CorpusError(
            "ground-truth polygon needs an even number of vertices", file, line
        )
    region = _validate_region(points, kind, file, line)

    has_text = len(fields) > coord_count
    text = ",".join(fields[coord_count:]) if has_text else None
    dont_care = role == "gt" and text == DONT_CARE_TEXT

    if role == "gt":
        if text is None:
            raise CorpusError("ground truth requires a transcription", file, line)
        if text == "" and not dont_care:
            raise CorpusError("empty ground-truth transcription", file, line)
    elif mode == "e2e" and text is None:
        raise CorpusError(
            "end-to-end evaluation requires a detection transcription", file, line
        )

    return WordInstance(
        region=region,
        text=text,
        dont_care=dont_care,
        image_id=image_id,
        source_line=line,
    )


def _image_id_from_name(name: str) -> str:
    stem = name[:-4] if name.endswith(".txt") else name
    for prefix in _FILE_PREFIXES:
        if stem.startswith(prefix) and len(stem) > len(prefix):
            return stem[len(prefix):]
    return stem


def parse_annotation_file(path: Path, role: str, mode: str,
                          image_id: str | None = None) -> list[WordInstance]:
    image_id = image_id if image_id is not None else _image_id_from_name(path.name)
    instances = []
    with open(path, encoding="utf-8-sig") as handle:
        for lineno, raw in enumerate(handle, start=1):
            instance = parse_annotation_line(
                raw, role=role, mode=mode, image_id=image_id, file=path, line=lineno
            )
            if instance is not None:
                instances.append(instance)
    return instances


def parse_annotation_dir(path: str | Path, role: str, mode: str) -> dict[str, list[WordInstance]]:
    """Parse a directory of per-image annotation files.

    File stems are the image ids after stripping a leading ``gt_``,
    ``res_``, or ``det_`` prefix.
    """
    directory = Path(path)
    if not directory.is_dir():
        raise CorpusError("annotation directory not found", directory)
    out: dict[str, list[WordInstance]] = {}
    sources: dict[str, Path] = {}
    for entry in sorted(directory.iterdir()):
        if entry.suffix != ".txt" or not entry.is_file():
            continue
        image_id = _image_id_from_name(entry.name)
        if image_id in out:
            raise CorpusError(
                f"duplicate annotations for image '{image_id}' "
                f"(also in {sources[image_id].name})",
                entry,
            )
        out[image_id] = parse_annotation_file(entry, role, mode, image_id)
        sources[image_id] = entry
    if role == "gt" and not out:
        raise CorpusError("no .txt annotation files found", directory)
    return out


def _points_from_json(value: object, file: Path, image_id: str) -> list[Point]:
    if not isinstance(value, list) or not value:
        raise CorpusError(f"image '{image_id}': instance needs a points list", file)
    if isinstance(value[0], (list, tuple)):
        flat: list[float] = []
        for pair in value:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise CorpusError(f"image '{image_id}': malformed point pair", file)
            flat.extend(pair)
    else:
        flat = list(value)
    if len(flat) % 2 != 0 or len(flat) < 6:
        raise CorpusError(f"image '{image_id}': odd or short coordinate list", file)
    points = []
    for i in range(0, len(flat), 2):
        x = _parse_coordinate(str(flat[i]))
        y = _parse_coordinate(str(flat[i + 1]))
        if x is None or y is None:
            raise CorpusError(f"image '{image_id}': non-numeric coordinate", file)
        points.append(Point(x, y))
    return points


def _instance_from_json(obj: object, *, role: str, mode: str, image_id: str,
                        file: Path, index: int) -> WordInstance:
    if not isinstance(obj, dict):
        raise CorpusError(f"image '{image_id}': instance must be an object", file)
    points = _points_from_json(obj.get("points"), file, image_id)
    kind = "quad" if len(points) == 4 else "polygon"
    if role == "gt" and kind == "polygon" and len(points) % 2 != 0:
        raise CorpusError(
            f"image '{image_id}': ground-truth polygon needs an even vertex count",
            file,
        )
    region = _validate_region(points, kind, file, None)
    text = obj.get("text")
    if text is not None and not isinstance(text, str):
        raise CorpusError(f"image '{image_id}': text must be a string", file)
    dont_care = bool(obj.get("dont_care", False)) or (role == "gt" and text == DONT_CARE_TEXT)
    if role == "gt":
        if text is None and not dont_care:
            raise CorpusError(f"image '{image_id}': ground truth requires text", file)
        if text == "" and not dont_care:
            raise CorpusError(f"image '{image_id}': empty ground-truth text", file)
    elif mode == "e2e" and text is None:
        raise CorpusError(
            f"image '{image_id}': end-to-end evaluation requires detection text",
            file,
        )
    return WordInstance(
        region=region,
        text=text,
        dont_care=dont_care,
        image_id=image_id,
        source_line=index + 1,
    )


def parse_json_corpus(path: str | Path, mode: str) -> dict[str, ImageAnnotations]:
    """Parse ``{image_id: {"gt": [...], "det": [...]}}`` from one JSON file."""
    file = Path(path)
    try:
        with open(file, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"invalid JSON: {exc}", file) from exc
    if not isinstance(data, dict):
        raise CorpusError("top level must map image ids to annotations", file)
    out: dict[str, ImageAnnotations] = {}
    for image_id in sorted(data):
        entry = data[image_id]
        if not isinstance(entry, dict):
            raise CorpusError(f"image '{image_id}': entry must be an object", file)
        gts = [
            _instance_from_json(obj, role="gt", mode=mode, image_id=image_id,
                                file=file, index=i)
            for i, obj in enumerate(entry.get("gt", []))
        ]
        dets = [
            _instance_from_json(obj, role="det", mode=mode, image_id=image_id,
                                file=file, index=i)
            for i, obj in enumerate(entry.get("det", []))
        ]
        out[image_id] = ImageAnnotations(gts=gts, dets=dets)
    return out


def load_gt_map(gt_path: str | Path, mode: str = "detection") -> dict[str, list[WordInstance]]:
    """Load only the ground-truth side of a corpus path."""
    path = Path(gt_path)
    if path.suffix == ".json":
        return {image_id: ann.gts for image_id, ann in parse_json_corpus(path, mode).items()}
    return parse_annotation_dir(path, "gt", mode)


def load_corpus(gt_path: str | Path, det_path: str | Path | None = None,
                mode: str = "detection") -> Corpus:
    """Load ground truths and detections into one corpus.

    Detections may come from a second directory/JSON file, or from the
    ``det`` entries of a JSON ground-truth file when ``det_path`` is
    omitted. Detections for unknown image ids are an error; images with no
    detection file simply have an empty detection list.
    """
    gt_file = Path(gt_path)
    det_map: dict[str, list[WordInstance]] = {}
    det_source: str | Path | None = det_path
    if gt_file.suffix == ".json":
        parsed = parse_json_corpus(gt_file, mode)
        gt_map = {image_id: ann.gts for image_id, ann in parsed.items()}
        if det_path is None:
            det_map = {image_id: ann.dets for image_id, ann in parsed.items()}
            det_source = gt_file
    else:
        gt_map = parse_annotation_dir(gt_file, "gt", mode)
        if det_path is None:
            raise CorpusError("a detection path is required for directory corpora",
                              gt_file)
    if det_path is not None:
        det_file = Path(det_path)
        if det_file.suffix == ".json":
            det_map = {
                image_id: ann.dets
                for image_id, ann in parse_json_corpus(det_file, mode).items()
            }
        else:
            det_map = parse_annotation_dir(det_file, "det", mode)

    unknown = sorted(set(det_map) - set(gt_map))
    if unknown:
        raise CorpusError(
            f"detections reference unknown image '{unknown[0]}'", det_source
        )
    images = {
        image_id: ImageAnnotations(gts=gt_map[image_id],
                                   dets=det_map.get(image_id, []))
        for image_id in sorted(gt_map)
    }
    return Corpus(images=images)


def apply_dont_care(
    gts: Sequence[WordInstance],
    dets: Sequence[WordInstance],
    overlap_fraction: float = 0.5,
) -> tuple[list[WordInstance], list[WordInstance], int, int]:
    """Strip don't-care ground truths and absorb detections inside them.

    A detection is absorbed (neither matched nor counted as a false
    positive) when more than ``overlap_fraction`` of its own area lies in
    the union of the don't-care regions. Returns the kept ground truths,
    kept detections, and the two removal counts.
    """
    dc_regions = [g.region for g in gts if g.dont_care]
    kept_gts = [g for g in gts if not g.dont_care]
    if not dc_regions or not dets:
        return kept_gts, list(dets), len(dc_regions), 0
    kept_dets = []
    absorbed = 0
    for det in dets:
        det_area = area(det.region)
        covered = union_intersection_area(det.region, dc_regions)
        if covered / det_area > overlap_fraction:
            absorbed += 1
        else:
            kept_dets.append(det)
    return kept_gts, kept_dets, len(dc_regions), absorbed


def write_detection_dir(det_map: dict[str, Iterable[WordInstance]],
                        out_dir: str | Path) -> int:
    """Write detections as ``res_<image_id>.txt`` files; returns line count."""
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written = 0
    for image_id in sorted(det_map):
        lines = []
        for det in det_map[image_id]:
            coords = []
            for p in det.region.vertices:
                for value in (p.x, p.y):
                    coords.append(str(int(value)) if value == int(value) else repr(value))
            text = det.text if det.text is not None else ""
            lines.append(",".join(coords) + "," + text)
            written += 1
        (directory / f"res_{image_id}.txt").write_text(
            "\n".join(lines) + ("\n" if lines else ""), encoding="utf-8"
        )
    return written


def _fmt(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, int):
        return str(value)
    return json.dumps(value, ensure_ascii=False)


def _dump_json(value: object, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{inner}{json.dumps(key)}: {_dump_json(val, indent + 1)}'
            for key, val in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        items = [f"{inner}{_dump_json(val, indent + 1)}" for val in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _fmt(value)


def _attributes_dict(attributes: Attributes) -> dict:
    return {
        "split": attributes.split,
        "merge": attributes.merge,
        "miss": attributes.miss,
        "overlap": attributes.overlap,
        "fp_chars": attributes.fp_chars,
    }


def _image_dict(image: ImageReport, mode: str) -> dict:
    data: dict = {
        "image_id": image.image_id,
        "recall": image.recall,
        "precision": image.precision,
        "hmean": image.hmean,
    }
    if mode == "e2e" and image.rs is not None:
        data["rs"] = image.rs
    data.update({
        "num_gt": image.num_gt,
        "num_gt_dont_care": image.num_gt_dont_care,
        "num_gt_matched": image.num_gt_matched,
        "num_gt_missed": image.num_gt_missed,
        "num_det": image.num_det,
        "num_det_absorbed": image.num_det_absorbed,
        "num_det_matched": image.num_det_matched,
        "num_det_fp": image.num_det_fp,
        "attributes": _attributes_dict(image.attributes),
    })
    return data


def emit_report(report: EvalReport, format: str = "json",
                per_sample: bool = False) -> bytes:
    """Serialize an evaluation report deterministically.

    Scores are printed with six decimal digits, keys keep a fixed order,
    and per-image entries (when requested) are sorted by image id.
    """
    images = sorted(report.per_image, key=lambda img: img.image_id)
    if format == "json":
        data: dict = {
            "mode": report.mode,
            "recall": report.recall,
            "precision": report.precision,
            "hmean": report.hmean,
        }
        if report.mode == "e2e":
            data["rs"] = report.rs if report.rs is not None else 0.0
        data["attributes"] = _attributes_dict(report.attributes)
        if per_sample:
            data["images"] = [_image_dict(img, report.mode) for img in images]
        return (_dump_json(data, 0) + "\n").encode("utf-8")
    if format == "csv":
        header = ("scope,image_id,mode,recall,precision,hmean,rs,"
                  "split,merge,miss,overlap,fp_chars")
        rows = [header]

        def row(scope: str, image_id: str, recall: float, precision: float,
                hm: float, rs: float | None, attributes: Attributes) -> str:
            rs_text = f"{rs:.6f}" if report.mode == "e2e" and rs is not None else ""
            return (
                f"{scope},{image_id},{report.mode},{recall:.6f},{precision:.6f},"
                f"{hm:.6f},{rs_text},{attributes.split},{attributes.merge},"
                f"{attributes.miss},{attributes.overlap},{attributes.fp_chars}"
            )

        rows.append(row("all", "", report.recall, report.precision, report.hmean,
                        report.rs, report.attributes))
        if per_sample:
            for img in images:
                rows.append(row("image", img.image_id, img.recall, img.precision,
                                img.hmean, img.rs, img.attributes))
        return ("\n".join(rows) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")


def emit_baseline_report(report: "BaselineReport", format: str = "json",
                         per_sample: bool = False) -> bytes:
    """Serialize a box-overlap/exact-match baseline report."""
    images = sorted(report.per_image, key=lambda img: img.image_id)
    if format == "json":
        data: dict = {
            "mode": report.mode,
            "iou_recall": report.iou_recall,
            "iou_precision": report.iou_precision,
            "iou_hmean": report.iou_hmean,
        }
        if report.mode == "e2e":
            data["crw"] = {
                "recall": report.crw_recall,
                "precision": report.crw_precision,
                "hmean": report.crw_hmean,
            }
        if per_sample:
            entries = []
            for img in images:
                entry: dict = {
                    "image_id": img.image_id,
                    "true_positives": img.true_positives,
                    "num_gt": img.num_gt,
                    "num_det": img.num_det,
                }
                if report.mode == "e2e":
                    entry["crw_correct"] = img.crw_correct or 0
                entries.append(entry)
            data["images"] = entries
        return (_dump_json(data, 0) + "\n").encode("utf-8")
    if format == "csv":
        header = ("scope,image_id,mode,iou_recall,iou_precision,iou_hmean,"
                  "crw_recall,crw_precision,crw_hmean")
        if report.mode == "e2e":
            crw = (f"{report.crw_recall:.6f},{report.crw_precision:.6f},"
                   f"{report.crw_hmean:.6f}")
        else:
            crw = ",,"
        rows = [header,
                f"all,,{report.mode},{report.iou_recall:.6f},"
                f"{report.iou_precision:.6f},{report.iou_hmean:.6f},{crw}"]
        return ("\n".join(rows) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {format!r}")
