"""Schema, validation, statistics, and fine-tuning export for annotation corpora.

Two record kinds: design records (a background image plus fully
attributed text elements and a user description) and text-segmentation
records (an image, a grayscale mask of the stylized text region, and a
style caption). A corpus is a manifest file listing record files in the
same JSON dialect as poster documents.

Validators are total: they never raise on malformed records, they
return diagnostics. The fine-tuning export emits one instruction/response
JSONL pair per valid record, where the response is exactly the remote
planner wire form, so exported data trains a drop-in planner backend.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .document import (Alignment, Role, SchemaError, TypographySpec, _TreeReader,
                       parse_color, typography_from_tree)
from .planner import relative_luminance
from .raster import CoverageMask, RasterImage


@dataclass(frozen=True)
class AnnotatedElement:
    role: Role
    content: str
    typography: TypographySpec


@dataclass(frozen=True)
class DesignRecord:
    background_ref: str
    elements: tuple[AnnotatedElement, ...]
    user_description: str


@dataclass(frozen=True)
class TextSegRecord:
    image_ref: str
    mask_ref: str
    description: str


@dataclass(frozen=True)
class Diagnostic:
    path: str
    rule_id: str
    message: str


def design_record_from_tree(tree) -> DesignRecord:
    root = _TreeReader(tree)
    elements = []
    for node in root.child("elements").items():
        role = node.child("role").str_()
        if role not in Role._value2member_map_:
            node.child("role").fail(f"unknown role {role!r}")
        elements.append(AnnotatedElement(
            role=Role(role),
            content=node.child("content").str_(),
            typography=typography_from_tree(node),
        ))
    return DesignRecord(
        background_ref=root.child("background_ref").str_(),
        elements=tuple(elements),
        user_description=root.child("user_description").str_(),
    )


def design_record_to_tree(record: DesignRecord) -> dict:
    return {
        "background_ref": record.background_ref,
        "user_description": record.user_description,
        "elements": [
            {
                "role": el.role.value, "content": el.content,
                "x": el.typography.x, "y": el.typography.y,
                "box_width": el.typography.box_width, "box_height": el.typography.box_height,
                "font_id": el.typography.font_id, "font_size": el.typography.font_size,
                "color": el.typography.color, "alignment": el.typography.alignment.value,
                "rotation_deg": el.typography.rotation_deg,
            }
            for el in record.elements
        ],
    }


def textseg_record_from_tree(tree) -> TextSegRecord:
    root = _TreeReader(tree)
    return TextSegRecord(
        image_ref=root.child("image_ref").str_(),
        mask_ref=root.child("mask_ref").str_(),
        description=root.child("description").str_(),
    )


def _resolve(base_dir, ref: str) -> Path:
    return (Path(base_dir) / ref) if base_dir is not None else Path(ref)


def _image_size(path: Path) -> tuple[int, int] | None:
    try:
        return RasterImage.load(path).size
    except Exception:
        return None


def validate_design(record: DesignRecord, base_dir=None) -> list[Diagnostic]:
    """Empty list iff every invariant holds; never raises."""
    issues: list[Diagnostic] = []
    if not record.user_description.strip():
        issues.append(Diagnostic("user_description", "empty_description",
                                 "user description must be non-empty"))
    size = _image_size(_resolve(base_dir, record.background_ref))
    if size is None:
        issues.append(Diagnostic("background_ref", "missing_background",
                                 f"cannot read background image {record.background_ref!r}"))
    for k, el in enumerate(record.elements):
        path = f"elements[{k}]"
        if not el.content.strip():
            issues.append(Diagnostic(path + ".content", "empty_content",
                                     "element content must be non-empty"))
        spec = el.typography
        if spec.box_width <= 0 or spec.box_height <= 0:
            issues.append(Diagnostic(path, "degenerate_box", "box sides must be > 0"))
            continue
        if size is not None:
            w, h = size
            if spec.x < 0 or spec.y < 0 or spec.x + spec.box_width > w or spec.y + spec.box_height > h:
                issues.append(Diagnostic(path, "box_out_of_bounds",
                                         f"box {spec.box} outside background {w}x{h}"))
        if not (spec.font_size > 0):
            issues.append(Diagnostic(path + ".font_size", "bad_font_size",
                                     "font_size must be > 0"))
        elif spec.font_size > spec.box_height:
            issues.append(Diagnostic(path + ".font_size", "font_exceeds_box",
                                     "font_size exceeds box_height"))
        try:
            parse_color(spec.color)
        except ValueError:
            issues.append(Diagnostic(path + ".color", "bad_color",
                                     f"invalid color {spec.color!r}"))
        if not (-180.0 <= spec.rotation_deg < 180.0):
            issues.append(Diagnostic(path + ".rotation_deg", "bad_rotation",
                                     "rotation outside [-180, 180)"))
    return issues


def validate_textseg(record: TextSegRecord, base_dir=None) -> list[Diagnostic]:
    issues: list[Diagnostic] = []
    if not record.description.strip():
        issues.append(Diagnostic("description", "empty_description",
                                 "style description must be non-empty"))
    image_size = _image_size(_resolve(base_dir, record.image_ref))
    if image_size is None:
        issues.append(Diagnostic("image_ref", "missing_image",
                                 f"cannot read image {record.image_ref!r}"))
    mask = None
    try:
        mask = CoverageMask.load(_resolve(base_dir, record.mask_ref))
    except Exception:
        issues.append(Diagnostic("mask_ref", "missing_mask",
                                 f"cannot read mask {record.mask_ref!r}"))
    if mask is not None:
        if image_size is not None and mask.size != image_size:
            issues.append(Diagnostic("mask_ref", "dim_mismatch",
                                     f"mask {mask.size} does not match image {image_size}"))
        if not (mask.values > 0).any():
            issues.append(Diagnostic("mask_ref", "empty_mask",
                                     "mask has no nonzero pixel"))
    return issues


def mask_bbox(mask: CoverageMask) -> tuple[int, int, int, int]:
    """Tight (x, y, w, h) bounding box of the mask's nonzero region."""
    nz = mask.values > 0
    if not nz.any():
        raise ValueError("mask is empty")
    rows = np.nonzero(nz.any(axis=1))[0]
    cols = np.nonzero(nz.any(axis=0))[0]
    return (int(cols[0]), int(rows[0]),
            int(cols[-1] - cols[0] + 1), int(rows[-1] - rows[0] + 1))


# ---------------------------------------------------------------------------
# Corpus I/O

def load_manifest(manifest_path) -> list[Path]:
    manifest_path = Path(manifest_path)
    tree = json.loads(manifest_path.read_text(encoding="utf-8"))
    records = _TreeReader(tree).child("records")
    return [manifest_path.parent / node.str_() for node in records.items()]


def load_design_corpus(manifest_path) -> list[tuple[Path, DesignRecord | None, list[Diagnostic]]]:
    """(path, record-or-None, parse diagnostics) per manifest entry."""
    out = []
    for path in load_manifest(manifest_path):
        try:
            tree = json.loads(path.read_text(encoding="utf-8"))
            record = design_record_from_tree(tree)
            out.append((path, record, []))
        except (OSError, json.JSONDecodeError, SchemaError) as exc:
            out.append((path, None, [Diagnostic(str(path), "unreadable_record", str(exc))]))
    return out


# ---------------------------------------------------------------------------
# Statistics

@dataclass(frozen=True)
class StatsReport:
    record_count: int
    role_counts: dict[str, int]
    font_usage: dict[str, int]
    box_area_quantiles: dict[str, float]  # q25 / q50 / q75
    color_luminance_histogram: list[int]  # 10 equal bins over [0, 1]


def corpus_stats(records) -> StatsReport:
    records = list(records)
    role_counts: dict[str, int] = {role.value: 0 for role in Role}
    font_usage: dict[str, int] = {}
    areas: list[float] = []
    luminance_bins = [0] * 10
    for record in records:
        for el in record.elements:
            role_counts[el.role.value] += 1
            font_usage[el.typography.font_id] = font_usage.get(el.typography.font_id, 0) + 1
            areas.append(float(el.typography.box_width * el.typography.box_height))
            try:
                lum = relative_luminance(el.typography.color)
            except ValueError:
                continue
            luminance_bins[min(int(lum * 10), 9)] += 1
    if areas:
        q25, q50, q75 = np.quantile(np.array(areas), [0.25, 0.5, 0.75])
        quantiles = {"q25": float(q25), "q50": float(q50), "q75": float(q75)}
    else:
        quantiles = {"q25": 0.0, "q50": 0.0, "q75": 0.0}
    return StatsReport(
        record_count=len(records),
        role_counts=role_counts,
        font_usage=dict(sorted(font_usage.items())),
        box_area_quantiles=quantiles,
        color_luminance_histogram=luminance_bins,
    )


# ---------------------------------------------------------------------------
# Fine-tuning export

EXPORT_TEMPLATES = {
    "planner-v1": ("Design a poster layout. Canvas {width}x{height}px. "
                   "Description: {description} Items: {items}"),
}


def export_finetune(records, canvas_sizes, template_id: str = "planner-v1"
                    ) -> tuple[str, list[Diagnostic]]:
    """One JSONL instruction/response pair per valid record.

    ``canvas_sizes`` supplies (width, height) per record (the background
    image's dimensions). The response is the remote planner response wire
    form, so every exported line parses under the planner response schema.
    Records failing validation are excluded with a diagnostic. Output is
    deterministic for a given corpus.
    """
    if template_id not in EXPORT_TEMPLATES:
        raise ValueError(f"unknown template {template_id!r}")
    template = EXPORT_TEMPLATES[template_id]
    lines: list[str] = []
    diagnostics: list[Diagnostic] = []
    for index, (record, size) in enumerate(zip(records, canvas_sizes)):
        width, height = size
        issues = _validate_for_export(record, (width, height))
        if issues:
            diagnostics.extend(
                Diagnostic(f"records[{index}].{d.path}", d.rule_id, d.message) for d in issues)
            continue
        items_text = "; ".join(f"{el.role.value}: {el.content!r}" for el in record.elements)
        instruction = template.format(width=width, height=height,
                                      description=record.user_description,
                                      items=items_text)
        response = {
            "planner_id": f"dataset/{template_id}",
            "items": [
                {
                    "x": el.typography.x, "y": el.typography.y,
                    "box_width": el.typography.box_width,
                    "box_height": el.typography.box_height,
                    "font_id": el.typography.font_id,
                    "font_size": el.typography.font_size,
                    "color": el.typography.color,
                    "alignment": el.typography.alignment.value,
                    "rotation_deg": el.typography.rotation_deg,
                }
                for el in record.elements
            ],
        }
        lines.append(json.dumps(
            {"instruction": instruction, "response": json.dumps(response, sort_keys=True)},
            sort_keys=True, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else ""), diagnostics


def _validate_for_export(record: DesignRecord, size: tuple[int, int]) -> list[Diagnostic]:
    """validate_design against known canvas dims, without touching disk."""
    issues: list[Diagnostic] = []
    if not record.user_description.strip():
        issues.append(Diagnostic("user_description", "empty_description",
                                 "user description must be non-empty"))
    w, h = size
    for k, el in enumerate(record.elements):
        path = f"elements[{k}]"
        spec = el.typography
        if not el.content.strip():
            issues.append(Diagnostic(path + ".content", "empty_content",
                                     "element content must be non-empty"))
        if spec.box_width <= 0 or spec.box_height <= 0:
            issues.append(Diagnostic(path, "degenerate_box", "box sides must be > 0"))
            continue
        if spec.x < 0 or spec.y < 0 or spec.x + spec.box_width > w or spec.y + spec.box_height > h:
            issues.append(Diagnostic(path, "box_out_of_bounds",
                                     f"box {spec.box} outside background {w}x{h}"))
        if not (spec.font_size > 0):
            issues.append(Diagnostic(path + ".font_size", "bad_font_size", "font_size must be > 0"))
        elif spec.font_size > spec.box_height:
            issues.append(Diagnostic(path + ".font_size", "font_exceeds_box",
                                     "font_size exceeds box_height"))
        try:
            parse_color(spec.color)
        except ValueError:
            issues.append(Diagnostic(path + ".color", "bad_color", f"invalid color {spec.color!r}"))
        if not (-180.0 <= spec.rotation_deg < 180.0):
            issues.append(Diagnostic(path + ".rotation_deg", "bad_rotation",
                                     "rotation outside [-180, 180)"))
    return issues
