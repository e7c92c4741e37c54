"""Editable poster document model.

A document is a canvas plus an ordered stack of layers: one background,
text elements carrying full typography, and optional art-text layers
(stylized raster + mask) tied to individual elements. Documents are
immutable values; edits return new documents.

Coordinates are pixels, origin top-left, y growing downward. Rotation is
degrees counterclockwise about the bounding-box center. Colors are sRGB
hex, "#RRGGBB" or "#RRGGBBAA".

The on-disk form is canonical JSON: keys sorted lexicographically,
two-space indent, UTF-8, trailing newline. Equal documents serialize to
identical bytes; list order is significant. Raster payloads inside art
layers are embedded as base64 PNG. Resolved background pixels are a
runtime cache and are neither serialized nor compared.
"""

from __future__ import annotations

import base64
import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

from .raster import CoverageMask, RasterImage

CANVAS_MIN = 64
CANVAS_MAX = 8192
ROTATION_MIN = -180.0
ROTATION_MAX = 180.0  # exclusive

_COLOR_RE = re.compile(r"#[0-9a-fA-F]{6}([0-9a-fA-F]{2})?\Z")


class Role(str, Enum):
    TITLE = "title"
    SUBTITLE = "subtitle"
    INFORMATION = "information"


class Alignment(str, Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"


class DocumentError(Exception):
    pass


class ParseError(DocumentError):
    """Malformed document text (not even JSON)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class SchemaError(DocumentError):
    """Well-formed text that violates the document schema or an invariant."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class UnknownElementError(DocumentError):
    pass


class InvariantViolation(DocumentError):
    """An edit would produce an invalid document; the original is unchanged."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def parse_color(color: str) -> tuple[int, int, int, int]:
    """Parse "#RRGGBB" / "#RRGGBBAA" into (r, g, b, a) with a defaulting to 255."""
    if not isinstance(color, str) or not _COLOR_RE.match(color):
        raise ValueError(f"invalid color {color!r}: expected #RRGGBB or #RRGGBBAA")
    digits = color[1:]
    r, g, b = (int(digits[i : i + 2], 16) for i in (0, 2, 4))
    a = int(digits[6:8], 16) if len(digits) == 8 else 255
    return (r, g, b, a)


def _canonical_float(value) -> float:
    # +0.0 so that -0.0 and 0.0 serialize identically
    return float(value) + 0.0


@dataclass(frozen=True)
class TypographySpec:
    """Placement and styling for one text element: the six planner attributes."""

    x: int
    y: int
    box_width: int
    box_height: int
    font_id: str
    font_size: float
    color: str
    alignment: Alignment
    rotation_deg: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alignment", Alignment(self.alignment))
        object.__setattr__(self, "font_size", _canonical_float(self.font_size))
        object.__setattr__(self, "rotation_deg", _canonical_float(self.rotation_deg))

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x, self.y, self.box_width, self.box_height)


@dataclass(frozen=True)
class TextElement:
    id: str
    role: Role
    content: str
    typography: TypographySpec

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))


@dataclass(frozen=True)
class GeneratedSource:
    """Background produced by a remote generative backend."""

    prompt: str
    backend_id: str
    seed: int


@dataclass(frozen=True)
class UserSource:
    """Background supplied by the user as an image file."""

    image_ref: str


@dataclass(frozen=True)
class ProceduralSource:
    """Deterministic locally computed background (gradient + value noise)."""

    prompt: str
    seed: int


BackgroundSource = Union[GeneratedSource, UserSource, ProceduralSource]


@dataclass(frozen=True)
class BackgroundLayer:
    source: BackgroundSource
    # Resolved pixels are a cache: excluded from equality and serialization.
    pixels: RasterImage | None = field(default=None, compare=False)

    def resolved(self) -> RasterImage:
        if self.pixels is None:
            raise DocumentError("background pixels not resolved")
        return self.pixels

    def with_pixels(self, pixels: RasterImage) -> "BackgroundLayer":
        return BackgroundLayer(source=self.source, pixels=pixels)


@dataclass(frozen=True)
class ArtTextLayer:
    """Stylized rendering of one element, blended in via a feathered mask.

    ``stale`` marks a layer whose underlying pixels no longer match the
    document (e.g. the background was replaced); it must be re-stylized
    or removed before flattening.
    """

    element_id: str
    style_prompt: str
    mask: CoverageMask
    stylized_pixels: RasterImage
    feather_sigma: float = 2.0
    stale: bool = False

    def __post_init__(self):
        object.__setattr__(self, "feather_sigma", _canonical_float(self.feather_sigma))


@dataclass(frozen=True)
class PosterDocument:
    canvas_width: int
    canvas_height: int
    background: BackgroundLayer
    elements: tuple[TextElement, ...] = ()
    art_layers: tuple[ArtTextLayer, ...] = ()
    metadata: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "art_layers", tuple(self.art_layers))
        meta = self.metadata
        if isinstance(meta, dict):
            meta = meta.items()
        object.__setattr__(self, "metadata", tuple(sorted((str(k), str(v)) for k, v in meta)))

    @property
    def meta(self) -> dict[str, str]:
        return dict(self.metadata)

    def with_metadata(self, **entries: str) -> "PosterDocument":
        merged = self.meta
        for key, value in entries.items():
            if value is None:
                merged.pop(key, None)
            else:
                merged[key] = str(value)
        return replace(self, metadata=tuple(sorted(merged.items())))

    def element(self, element_id: str) -> TextElement:
        for el in self.elements:
            if el.id == element_id:
                return el
        raise UnknownElementError(f"no element with id {element_id!r}")

    def has_element(self, element_id: str) -> bool:
        return any(el.id == element_id for el in self.elements)

    def art_layer_for(self, element_id: str) -> ArtTextLayer | None:
        for layer in self.art_layers:
            if layer.element_id == element_id:
                return layer
        return None

    @property
    def revision(self) -> int:
        return int(self.meta.get("revision", "0"))

    @property
    def stale_elements(self) -> tuple[str, ...]:
        raw = self.meta.get("stale_elements", "")
        return tuple(s for s in raw.split(",") if s)


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class SchemaIssue:
    path: str
    message: str


def _check_typography(spec: TypographySpec, canvas_w: int, canvas_h: int, path: str,
                      issues: list[SchemaIssue]) -> None:
    def bad(msg):
        issues.append(SchemaIssue(path, msg))

    for name in ("x", "y", "box_width", "box_height"):
        if not isinstance(getattr(spec, name), int) or isinstance(getattr(spec, name), bool):
            bad(f"{name} must be an integer")
            return
    if spec.box_width <= 0 or spec.box_height <= 0:
        bad("box_width and box_height must be > 0")
    if spec.x < 0 or spec.y < 0 or spec.x + spec.box_width > canvas_w or spec.y + spec.box_height > canvas_h:
        bad(f"bounding box {spec.box} lies outside canvas {canvas_w}x{canvas_h}")
    if not (spec.font_size > 0):
        bad("font_size must be > 0")
    elif spec.font_size > spec.box_height:
        bad(f"font_size {spec.font_size} exceeds box_height {spec.box_height}")
    try:
        parse_color(spec.color)
    except ValueError as exc:
        bad(str(exc))
    if not (ROTATION_MIN <= spec.rotation_deg < ROTATION_MAX):
        bad(f"rotation_deg {spec.rotation_deg} outside [-180, 180)")


def validate_document(doc: PosterDocument) -> list[SchemaIssue]:
    """All invariant violations in the document, empty when valid."""
    issues: list[SchemaIssue] = []
    for name in ("canvas_width", "canvas_height"):
        value = getattr(doc, name)
        if not isinstance(value, int) or isinstance(value, bool) or not (CANVAS_MIN <= value <= CANVAS_MAX):
            issues.append(SchemaIssue(name, f"{name} must be an integer in [{CANVAS_MIN}, {CANVAS_MAX}]"))
            return issues

    if doc.background.pixels is not None and doc.background.pixels.size != (doc.canvas_width, doc.canvas_height):
        issues.append(SchemaIssue("background", "resolved background does not match canvas dimensions"))

    seen: set[str] = set()
    for i, el in enumerate(doc.elements):
        path = f"elements[{i}]"
        if not el.id:
            issues.append(SchemaIssue(path + ".id", "element id must be non-empty"))
        if el.id in seen:
            issues.append(SchemaIssue(path + ".id", f"duplicate element id {el.id!r}"))
        seen.add(el.id)
        if not el.content.strip():
            issues.append(SchemaIssue(path + ".content", "content must be non-empty after trimming whitespace"))
        _check_typography(el.typography, doc.canvas_width, doc.canvas_height, path + ".typography", issues)

    for i, layer in enumerate(doc.art_layers):
        path = f"art_layers[{i}]"
        if layer.element_id not in seen:
            issues.append(SchemaIssue(path + ".element_id",
                                      f"art layer references unknown element {layer.element_id!r}"))
        canvas = (doc.canvas_width, doc.canvas_height)
        if layer.mask.size != canvas:
            issues.append(SchemaIssue(path + ".mask", "mask dimensions do not match canvas"))
        if layer.stylized_pixels.size != canvas:
            issues.append(SchemaIssue(path + ".stylized_pixels", "stylized pixels do not match canvas"))
        if layer.feather_sigma < 0:
            issues.append(SchemaIssue(path + ".feather_sigma", "feather_sigma must be >= 0"))
    return issues


def require_valid(doc: PosterDocument) -> PosterDocument:
    issues = validate_document(doc)
    if issues:
        raise SchemaError(issues[0].path, issues[0].message)
    return doc


# ---------------------------------------------------------------------------
# Serialization

def _source_to_tree(source: BackgroundSource) -> dict:
    if isinstance(source, GeneratedSource):
        return {"kind": "generated", "prompt": source.prompt,
                "backend_id": source.backend_id, "seed": source.seed}
    if isinstance(source, UserSource):
        return {"kind": "user", "image_ref": source.image_ref}
    if isinstance(source, ProceduralSource):
        return {"kind": "procedural", "prompt": source.prompt, "seed": source.seed}
    raise TypeError(f"unknown background source {source!r}")


def document_to_tree(doc: PosterDocument) -> dict:
    return {
        "canvas_width": doc.canvas_width,
        "canvas_height": doc.canvas_height,
        "background": {"source": _source_to_tree(doc.background.source)},
        "elements": [
            {
                "id": el.id,
                "role": el.role.value,
                "content": el.content,
                "typography": {
                    "x": el.typography.x,
                    "y": el.typography.y,
                    "box_width": el.typography.box_width,
                    "box_height": el.typography.box_height,
                    "font_id": el.typography.font_id,
                    "font_size": el.typography.font_size,
                    "color": el.typography.color,
                    "alignment": el.typography.alignment.value,
                    "rotation_deg": el.typography.rotation_deg,
                },
            }
            for el in doc.elements
        ],
        "art_layers": [
            {
                "element_id": layer.element_id,
                "style_prompt": layer.style_prompt,
                "feather_sigma": layer.feather_sigma,
                "stale": layer.stale,
                "mask_png": base64.b64encode(layer.mask.to_png_bytes()).decode("ascii"),
                "pixels_png": base64.b64encode(layer.stylized_pixels.to_png_bytes()).decode("ascii"),
            }
            for layer in doc.art_layers
        ],
        "metadata": doc.meta,
    }


def serialize(doc: PosterDocument) -> str:
    """Canonical text form; equal documents produce identical bytes."""
    return json.dumps(document_to_tree(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


class _TreeReader:
    """Walks a parsed JSON tree with path tracking for SchemaError reporting."""

    def __init__(self, tree, path: str = ""):
        self.tree = tree
        self.path = path

    def fail(self, message: str):
        raise SchemaError(self.path or "$", message)

    def child(self, key: str):
        if not isinstance(self.tree, dict):
            self.fail("expected an object")
        if key not in self.tree:
            self.fail(f"missing field {key!r}")
        sub = f"{self.path}.{key}" if self.path else key
        return _TreeReader(self.tree[key], sub)

    def items(self):
        if not isinstance(self.tree, list):
            self.fail("expected a list")
        for i, item in enumerate(self.tree):
            yield _TreeReader(item, f"{self.path}[{i}]")

    def str_(self) -> str:
        if not isinstance(self.tree, str):
            self.fail("expected a string")
        return self.tree

    def int_(self) -> int:
        if not isinstance(self.tree, int) or isinstance(self.tree, bool):
            self.fail("expected an integer")
        return self.tree

    def float_(self) -> float:
        if isinstance(self.tree, bool) or not isinstance(self.tree, (int, float)):
            self.fail("expected a number")
        return float(self.tree)

    def bool_(self) -> bool:
        if not isinstance(self.tree, bool):
            self.fail("expected a boolean")
        return self.tree

    def str_map(self) -> dict[str, str]:
        if not isinstance(self.tree, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in self.tree.items()
        ):
            self.fail("expected an object of strings")
        return dict(self.tree)

    def png_raster(self) -> RasterImage:
        try:
            return RasterImage.from_png_bytes(base64.b64decode(self.str_(), validate=True))
        except SchemaError:
            raise
        except Exception as exc:
            self.fail(f"invalid base64 PNG payload: {exc}")

    def png_mask(self) -> CoverageMask:
        try:
            return CoverageMask.from_png_bytes(base64.b64decode(self.str_(), validate=True))
        except SchemaError:
            raise
        except Exception as exc:
            self.fail(f"invalid base64 PNG payload: {exc}")


def _source_from_tree(node: _TreeReader) -> BackgroundSource:
    kind = node.child("kind").str_()
    if kind == "generated":
        return GeneratedSource(prompt=node.child("prompt").str_(),
                               backend_id=node.child("backend_id").str_(),
                               seed=node.child("seed").int_())
    if kind == "user":
        return UserSource(image_ref=node.child("image_ref").str_())
    if kind == "procedural":
        return ProceduralSource(prompt=node.child("prompt").str_(),
                                seed=node.child("seed").int_())
    node.child("kind").fail(f"unknown background kind {kind!r}")


def typography_from_tree(node: _TreeReader) -> TypographySpec:
    alignment = node.child("alignment").str_()
    if alignment not in Alignment._value2member_map_:
        node.child("alignment").fail(f"unknown alignment {alignment!r}")
    return TypographySpec(
        x=node.child("x").int_(),
        y=node.child("y").int_(),
        box_width=node.child("box_width").int_(),
        box_height=node.child("box_height").int_(),
        font_id=node.child("font_id").str_(),
        font_size=node.child("font_size").float_(),
        color=node.child("color").str_(),
        alignment=Alignment(alignment),
        rotation_deg=node.child("rotation_deg").float_(),
    )


def document_from_tree(tree) -> PosterDocument:
    root = _TreeReader(tree)
    elements = []
    for node in root.child("elements").items():
        role = node.child("role").str_()
        if role not in Role._value2member_map_:
            node.child("role").fail(f"unknown role {role!r}")
        elements.append(TextElement(
            id=node.child("id").str_(),
            role=Role(role),
            content=node.child("content").str_(),
            typography=typography_from_tree(node.child("typography")),
        ))
    art_layers = []
    for node in root.child("art_layers").items():
        art_layers.append(ArtTextLayer(
            element_id=node.child("element_id").str_(),
            style_prompt=node.child("style_prompt").str_(),
            feather_sigma=node.child("feather_sigma").float_(),
            stale=node.child("stale").bool_(),
            mask=node.child("mask_png").png_mask(),
            stylized_pixels=node.child("pixels_png").png_raster(),
        ))
    doc = PosterDocument(
        canvas_width=root.child("canvas_width").int_(),
        canvas_height=root.child("canvas_height").int_(),
        background=BackgroundLayer(source=_source_from_tree(root.child("background").child("source"))),
        elements=tuple(elements),
        art_layers=tuple(art_layers),
        metadata=root.child("metadata").str_map(),
    )
    return require_valid(doc)


def deserialize(text: str) -> PosterDocument:
    """Parse document text; raises ParseError (syntax) or SchemaError (invariants)."""
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    return document_from_tree(tree)


# ---------------------------------------------------------------------------
# Edit commands

@dataclass(frozen=True)
class MoveBox:
    element_id: str
    dx: int
    dy: int


@dataclass(frozen=True)
class ResizeBox:
    element_id: str
    box_width: int
    box_height: int


@dataclass(frozen=True)
class SetFont:
    element_id: str
    font_id: str


@dataclass(frozen=True)
class SetFontSize:
    element_id: str
    font_size: float


@dataclass(frozen=True)
class SetColor:
    element_id: str
    color: str


@dataclass(frozen=True)
class SetAlignment:
    element_id: str
    alignment: Alignment


@dataclass(frozen=True)
class SetRotation:
    element_id: str
    rotation_deg: float


@dataclass(frozen=True)
class SetContent:
    element_id: str
    content: str


@dataclass(frozen=True)
class ReplaceBackground:
    source: BackgroundSource


@dataclass(frozen=True)
class RemoveArtLayer:
    element_id: str


EditCommand = Union[MoveBox, ResizeBox, SetFont, SetFontSize, SetColor, SetAlignment,
                    SetRotation, SetContent, ReplaceBackground, RemoveArtLayer]

# Edits that change glyph geometry or content; SetColor keeps coverage intact.
_GEOMETRY_EDITS = (MoveBox, ResizeBox, SetFont, SetFontSize, SetAlignment, SetRotation, SetContent)


def _edited_element(el: TextElement, edit: EditCommand) -> TextElement:
    spec = el.typography
    if isinstance(edit, MoveBox):
        return replace(el, typography=replace(spec, x=spec.x + edit.dx, y=spec.y + edit.dy))
    if isinstance(edit, ResizeBox):
        return replace(el, typography=replace(spec, box_width=edit.box_width, box_height=edit.box_height))
    if isinstance(edit, SetFont):
        return replace(el, typography=replace(spec, font_id=edit.font_id))
    if isinstance(edit, SetFontSize):
        return replace(el, typography=replace(spec, font_size=edit.font_size))
    if isinstance(edit, SetColor):
        return replace(el, typography=replace(spec, color=edit.color))
    if isinstance(edit, SetAlignment):
        return replace(el, typography=replace(spec, alignment=Alignment(edit.alignment)))
    if isinstance(edit, SetRotation):
        return replace(el, typography=replace(spec, rotation_deg=edit.rotation_deg))
    if isinstance(edit, SetContent):
        return replace(el, content=edit.content)
    raise TypeError(f"not an element edit: {edit!r}")


def _set_stale_elements(doc: PosterDocument, ids) -> PosterDocument:
    value = ",".join(sorted(set(ids)))
    return doc.with_metadata(stale_elements=value if value else None)


def apply_edit(doc: PosterDocument, edit: EditCommand) -> PosterDocument:
    """Apply one edit, re-validate, and bump the revision counter.

    Raises UnknownElementError for a missing target and InvariantViolation
    when the edit would break a document invariant; the input document is
    never mutated either way.
    """
    if isinstance(edit, ReplaceBackground):
        new_doc = replace(
            doc,
            background=BackgroundLayer(source=edit.source),
            art_layers=tuple(replace(l, stale=True) for l in doc.art_layers),
        )
        new_doc = _set_stale_elements(new_doc, set(doc.stale_elements) | {l.element_id for l in doc.art_layers})
    elif isinstance(edit, RemoveArtLayer):
        if not doc.has_element(edit.element_id):
            raise UnknownElementError(f"no element with id {edit.element_id!r}")
        new_doc = replace(
            doc,
            art_layers=tuple(l for l in doc.art_layers if l.element_id != edit.element_id),
        )
        new_doc = _set_stale_elements(new_doc, set(doc.stale_elements) - {edit.element_id})
    else:
        old = doc.element(edit.element_id)
        new = _edited_element(old, edit)
        elements = tuple(new if el.id == edit.element_id else el for el in doc.elements)
        new_doc = replace(doc, elements=elements)
        if isinstance(edit, _GEOMETRY_EDITS) and new != old:
            had_layer = doc.art_layer_for(edit.element_id) is not None
            new_doc = replace(
                new_doc,
                art_layers=tuple(l for l in new_doc.art_layers if l.element_id != edit.element_id),
            )
            if had_layer:
                new_doc = _set_stale_elements(new_doc, set(new_doc.stale_elements) | {edit.element_id})

    new_doc = new_doc.with_metadata(revision=str(doc.revision + 1))
    issues = validate_document(new_doc)
    if issues:
        raise InvariantViolation(issues[0].path, issues[0].message)
    return new_doc


def with_art_layer(doc: PosterDocument, layer: ArtTextLayer) -> PosterDocument:
    """Attach (or replace) the art layer for one element, clearing its staleness."""
    if not doc.has_element(layer.element_id):
        raise UnknownElementError(f"no element with id {layer.element_id!r}")
    kept = tuple(l for l in doc.art_layers if l.element_id != layer.element_id)
    new_doc = replace(doc, art_layers=kept + (layer,))
    new_doc = _set_stale_elements(new_doc, set(new_doc.stale_elements) - {layer.element_id})
    new_doc = new_doc.with_metadata(revision=str(doc.revision + 1))
    return require_valid(new_doc)


# Wire form for edits (CLI edit scripts and the HTTP service).

_EDIT_OPS = {
    "move_box": (MoveBox, ("element_id", "dx", "dy")),
    "resize_box": (ResizeBox, ("element_id", "box_width", "box_height")),
    "set_font": (SetFont, ("element_id", "font_id")),
    "set_font_size": (SetFontSize, ("element_id", "font_size")),
    "set_color": (SetColor, ("element_id", "color")),
    "set_alignment": (SetAlignment, ("element_id", "alignment")),
    "set_rotation": (SetRotation, ("element_id", "rotation_deg")),
    "set_content": (SetContent, ("element_id", "content")),
    "replace_background": (ReplaceBackground, ("source",)),
    "remove_art_layer": (RemoveArtLayer, ("element_id",)),
}


def edit_from_tree(tree) -> EditCommand:
    node = _TreeReader(tree, "edit")
    op = node.child("op").str_()
    if op not in _EDIT_OPS:
        node.child("op").fail(f"unknown edit op {op!r}")
    cls, fields = _EDIT_OPS[op]
    kwargs = {}
    for name in fields:
        child = node.child(name)
        if name == "source":
            kwargs[name] = _source_from_tree(child)
        elif name in ("dx", "dy", "box_width", "box_height"):
            kwargs[name] = child.int_()
        elif name in ("font_size", "rotation_deg"):
            kwargs[name] = child.float_()
        elif name == "alignment":
            value = child.str_()
            if value not in Alignment._value2member_map_:
                child.fail(f"unknown alignment {value!r}")
            kwargs[name] = Alignment(value)
        else:
            kwargs[name] = child.str_()
    return cls(**kwargs)


def edit_to_tree(edit: EditCommand) -> dict:
    for op, (cls, fields) in _EDIT_OPS.items():
        if type(edit) is cls:
            tree = {"op": op}
            for name in fields:
                value = getattr(edit, name)
                if name == "source":
                    value = _source_to_tree(value)
                elif isinstance(value, Alignment):
                    value = value.value
                tree[name] = value
            return tree
    raise TypeError(f"unknown edit command {edit!r}")
