"""Deterministic glyph layout and rasterization.

Text is never generated, only rendered: each codepoint maps through the
font cmap to exactly one positioned glyph, so the drawn glyph sequence
is the content, codepoint for codepoint. Rasterization is a scanline
non-zero-winding fill with exact horizontal area coverage and 4x
vertical supersampling; identical inputs produce bit-identical buffers.

Layout places the text block inside the element's bounding box: lines
honor the alignment, the block is vertically centered, and when the
widest line overflows the box the font size is shrunk uniformly by the
smallest factor that fits (never below MIN_FONT_SIZE).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .document import PosterDocument, TextElement, TypographySpec, parse_color
from .fonts import FontRegistry, TrueTypeFont, flatten_contour
from .raster import CoverageMask, RasterImage

log = logging.getLogger(__name__)

MIN_FONT_SIZE = 6.0
_SUBROWS = 4  # vertical supersamples per pixel row


class DoesNotFit(Exception):
    """Content overflows its box even at MIN_FONT_SIZE."""


@dataclass(frozen=True)
class PositionedGlyph:
    glyph_id: int
    codepoint: int
    x: float  # pen origin, device px
    baseline_y: float
    size: float


@dataclass(frozen=True)
class GlyphRun:
    element_id: str
    glyphs: tuple[PositionedGlyph, ...]
    total_advance: float  # widest line, px
    line_count: int
    applied_font_size: float
    font_id: str  # resolved id actually used
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class RenderedElement:
    element_id: str
    pixels: RasterImage
    coverage: CoverageMask


def line_height(font: TrueTypeFont, size: float) -> float:
    return (font.ascender - font.descender + font.line_gap) * size / font.units_per_em


def _line_units(font: TrueTypeFont, line: str) -> float:
    """Advance of one line in font units, kerning included."""
    total = 0.0
    prev_gid = None
    for ch in line:
        gid = font.glyph_id(ord(ch))
        if prev_gid is not None:
            total += font.kerning(prev_gid, gid)
        total += font.advance(gid)
        prev_gid = gid
    return total


def measure_text(registry: FontRegistry, content: str, font_id: str,
                 font_size: float) -> tuple[float, float]:
    """(width, height) of the laid-out block in px: widest line advance by
    line count times line height. Unknown fonts resolve to the fallback."""
    if font_size <= 0:
        raise ValueError("font_size must be > 0")
    _, font = registry.resolve(font_id)
    lines = content.split("\n")
    scale = font_size / font.units_per_em
    width = max(_line_units(font, line) for line in lines) * scale
    return width, len(lines) * line_height(font, font_size)


def layout_glyphs(registry: FontRegistry, element: TextElement,
                  canvas_size: tuple[int, int], clamp_to_min: bool = False) -> GlyphRun:
    """Position every glyph of the element inside its bounding box.

    Raises DoesNotFit when the content cannot fit the box width even at
    MIN_FONT_SIZE, unless ``clamp_to_min`` asks for the 6 px placeholder
    rendering instead (the overflow is then recorded as a warning).
    """
    spec = element.typography
    font_id, font = registry.resolve(spec.font_id)
    warnings = []
    if font_id != spec.font_id:
        warnings.append(f"font {spec.font_id!r} not in registry; used {font_id!r}")

    lines = element.content.split("\n")
    units = [_line_units(font, line) for line in lines]
    widest = max(units)

    applied = float(spec.font_size)
    if widest > 0 and widest * applied / font.units_per_em > spec.box_width:
        applied = spec.box_width * font.units_per_em / widest
        if applied < MIN_FONT_SIZE:
            if not clamp_to_min:
                raise DoesNotFit(
                    f"element {element.id!r}: text needs {applied:.2f}px < {MIN_FONT_SIZE}px"
                )
            warnings.append(
                f"element {element.id!r} overflows its box even at {MIN_FONT_SIZE}px"
            )
            applied = MIN_FONT_SIZE
        else:
            warnings.append(
                f"element {element.id!r}: font size reduced {spec.font_size} -> {applied:.3f}"
            )

    scale = applied / font.units_per_em
    lh = line_height(font, applied)
    ascent_px = font.ascender * scale
    block_top = spec.y + (spec.box_height - lh * len(lines)) / 2.0

    glyphs: list[PositionedGlyph] = []
    for i, (line, line_u) in enumerate(zip(lines, units)):
        line_w = line_u * scale
        if spec.alignment.value == "left":
            pen = float(spec.x)
        elif spec.alignment.value == "center":
            pen = spec.x + (spec.box_width - line_w) / 2.0
        else:
            pen = spec.x + spec.box_width - line_w
        baseline = block_top + i * lh + ascent_px
        prev_gid = None
        for ch in line:
            gid = font.glyph_id(ord(ch))
            if prev_gid is not None:
                pen += font.kerning(prev_gid, gid) * scale
            glyphs.append(PositionedGlyph(gid, ord(ch), pen, baseline, applied))
            pen += font.advance(gid) * scale
            prev_gid = gid

    return GlyphRun(
        element_id=element.id,
        glyphs=tuple(glyphs),
        total_advance=widest * scale,
        line_count=len(lines),
        applied_font_size=applied,
        font_id=font_id,
        warnings=tuple(warnings),
    )


# -- scanline fill ------------------------------------------------------------

def fill_polygons(polylines, width: int, height: int) -> np.ndarray:
    """Anti-aliased non-zero-winding fill of closed polylines.

    Exact interval coverage horizontally, _SUBROWS supersamples
    vertically. Returns a uint8 alpha plane of shape (height, width).
    """
    x0s, y0s, x1s, y1s = [], [], [], []
    for poly in polylines:
        for (ax, ay), (bx, by) in zip(poly, poly[1:]):
            if ay != by:
                x0s.append(ax)
                y0s.append(ay)
                x1s.append(bx)
                y1s.append(by)
    alpha = np.zeros((height, width), dtype=np.uint8)
    if not x0s:
        return alpha

    x0 = np.array(x0s)
    y0 = np.array(y0s)
    x1 = np.array(x1s)
    y1 = np.array(y1s)
    slope = (x1 - x0) / (y1 - y0)
    winding = np.where(y1 > y0, 1, -1)
    y_lo = np.minimum(y0, y1)
    y_hi = np.maximum(y0, y1)

    row_min = max(0, int(math.floor(float(y_lo.min()))))
    row_max = min(height - 1, int(math.ceil(float(y_hi.max()))))
    acc = np.zeros((row_max - row_min + 1, width), dtype=np.float64)

    for row in range(row_min, row_max + 1):
        target = acc[row - row_min]
        for sub in range(_SUBROWS):
            ys = row + (2 * sub + 1) / (2 * _SUBROWS)
            hit = (y_lo <= ys) & (ys < y_hi)
            if not hit.any():
                continue
            xs = x0[hit] + (ys - y0[hit]) * slope[hit]
            order = np.argsort(xs, kind="stable")
            xs = xs[order]
            cum = np.cumsum(winding[hit][order])
            for k in np.nonzero(cum[:-1] != 0)[0]:
                xa = min(max(xs[k], 0.0), float(width))
                xb = min(max(xs[k + 1], 0.0), float(width))
                if xb <= xa:
                    continue
                i0 = int(xa)
                i1 = int(xb)
                if i0 == i1:
                    target[i0] += xb - xa
                else:
                    target[i0] += i0 + 1 - xa
                    if i1 > i0 + 1:
                        target[i0 + 1 : i1] += 1.0
                    if i1 < width:
                        target[i1] += xb - i1

    block = np.rint(np.clip(acc / _SUBROWS, 0.0, 1.0) * 255.0).astype(np.uint8)
    alpha[row_min : row_max + 1] = block
    return alpha


def _glyph_polylines(font: TrueTypeFont, run: GlyphRun):
    scale_cache: dict[tuple[int, float], tuple] = {}
    for glyph in run.glyphs:
        key = (glyph.glyph_id, glyph.size)
        if key not in scale_cache:
            scale = glyph.size / font.units_per_em
            flattened = tuple(
                tuple((x * scale, y * scale) for (x, y) in flatten_contour(contour))
                for contour in font.glyph_contours(glyph.glyph_id)
            )
            scale_cache[key] = flattened
        for contour in scale_cache[key]:
            yield [(glyph.x + x, glyph.baseline_y - y) for (x, y) in contour]


def _snap_trig(value: float) -> float:
    for exact in (-1.0, 0.0, 1.0):
        if abs(value - exact) < 1e-12:
            return exact
    return value


def rotate_plane(plane: np.ndarray, degrees: float, center: tuple[float, float]) -> np.ndarray:
    """Rotate a scalar plane counterclockwise (screen coords) about center,
    bilinear resampling, zero outside. Exact identity at 0 degrees."""
    if degrees == 0.0:
        return plane
    rad = math.radians(degrees)
    c = _snap_trig(math.cos(rad))
    s = _snap_trig(math.sin(rad))
    cx, cy = center
    h, w = plane.shape
    ys, xs = np.mgrid[0:h, 0:w]
    dx = xs - cx
    dy = ys - cy
    # inverse map of screen-CCW rotation
    sx = c * dx - s * dy + cx
    sy = s * dx + c * dy + cy

    fx = np.floor(sx)
    fy = np.floor(sy)
    tx = sx - fx
    ty = sy - fy
    ix = fx.astype(np.int64)
    iy = fy.astype(np.int64)

    src = plane.astype(np.float64)
    out = np.zeros((h, w), dtype=np.float64)
    for oy, ox, weight in ((0, 0, (1 - tx) * (1 - ty)), (0, 1, tx * (1 - ty)),
                           (1, 0, (1 - tx) * ty), (1, 1, tx * ty)):
        gx = ix + ox
        gy = iy + oy
        valid = (gx >= 0) & (gx < w) & (gy >= 0) & (gy < h)
        values = np.zeros((h, w), dtype=np.float64)
        values[valid] = src[gy[valid], gx[valid]]
        out += weight * values
    return np.rint(np.clip(out, 0.0, 255.0)).astype(plane.dtype)


def rasterize_element(registry: FontRegistry, run: GlyphRun, spec: TypographySpec,
                      canvas_size: tuple[int, int]) -> RenderedElement:
    """Rasterize a glyph run to a canvas-sized layer in the spec color.

    Coverage is the effective per-pixel opacity (glyph alpha times the
    color's alpha); the pixel plane holds the solid fill color with that
    coverage as its alpha channel, ready for source-over compositing.
    """
    width, height = canvas_size
    _, font = registry.resolve(run.font_id)
    ink = fill_polygons(list(_glyph_polylines(font, run)), width, height)

    if spec.rotation_deg != 0.0:
        center = (spec.x + spec.box_width / 2.0, spec.y + spec.box_height / 2.0)
        ink = rotate_plane(ink, spec.rotation_deg, center)

    r, g, b, a = parse_color(spec.color)
    if a == 255:
        eff = ink
    else:
        eff = np.rint(ink.astype(np.float64) * (a / 255.0)).astype(np.uint8)

    pixels = np.empty((height, width, 4), dtype=np.uint8)
    pixels[..., 0] = r
    pixels[..., 1] = g
    pixels[..., 2] = b
    pixels[..., 3] = eff
    return RenderedElement(
        element_id=run.element_id,
        pixels=RasterImage(pixels),
        coverage=CoverageMask.from_alpha(eff),
    )


def render_all(registry: FontRegistry, doc: PosterDocument) -> list[RenderedElement]:
    """One RenderedElement per document element, in document order.

    Elements that overflow even at MIN_FONT_SIZE are rendered at the
    placeholder minimum and the overflow is logged as a warning.
    """
    rendered = []
    canvas = (doc.canvas_width, doc.canvas_height)
    for element in doc.elements:
        run = layout_glyphs(registry, element, canvas, clamp_to_min=True)
        for message in run.warnings:
            log.warning("%s", message)
        rendered.append(rasterize_element(registry, run, element.typography, canvas))
    return rendered
