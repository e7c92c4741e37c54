"""Mask-guided blending and layer flattening.

The core blend is convex per pixel and per channel:

    out = m * i1 + (1 - m) * i2

computed in floating point on sRGB values and rounded to 8 bits, so
binary masks select sources bit-exactly. Masks are feathered with a
separable Gaussian (radius ceil(3*sigma), replicate-edge padding) before
blending art-text layers; plain text layers are alpha-composited
source-over using their coverage as alpha.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .document import PosterDocument
from .raster import CoverageMask, RasterImage, require_same_size

# Default feather width, tuned at 1024 px canvas width and scaled with it.
FEATHER_SIGMA_AT_1024 = 2.0


class StaleArtLayer(Exception):
    """An art layer is flagged stale; re-stylize or remove it before flattening."""


def default_feather_sigma(canvas_width: int) -> float:
    return FEATHER_SIGMA_AT_1024 * canvas_width / 1024.0


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian with radius ceil(3*sigma); sums to 1."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return np.array([1.0])
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_feather(mask: CoverageMask, sigma: float) -> CoverageMask:
    """Separable Gaussian smoothing with replicate-edge padding.

    sigma = 0 returns the input unchanged; constant masks are fixpoints.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return mask
    kernel = gaussian_kernel1d(sigma)
    radius = (len(kernel) - 1) // 2
    values = np.asarray(mask.values, dtype=np.float64)

    padded = np.pad(values, ((0, 0), (radius, radius)), mode="edge")
    horiz = np.zeros_like(values)
    for i, w in enumerate(kernel):
        horiz += w * padded[:, i : i + values.shape[1]]

    padded = np.pad(horiz, ((radius, radius), (0, 0)), mode="edge")
    out = np.zeros_like(values)
    for i, w in enumerate(kernel):
        out += w * padded[i : i + values.shape[0], :]

    return CoverageMask(np.clip(out, 0.0, 1.0).astype(np.float32))


def blend(i1: RasterImage, i2: RasterImage, m: CoverageMask) -> RasterImage:
    """Per-pixel, per-channel convex combination of i1 and i2 weighted by m."""
    require_same_size(i1, i2, m)
    weight = m.values.astype(np.float64)[..., None]
    out = weight * i1.pixels + (1.0 - weight) * i2.pixels
    return RasterImage(np.rint(out).astype(np.uint8))


def source_over(src_rgb_alpha: RasterImage, dst: RasterImage, coverage: CoverageMask) -> RasterImage:
    """Composite src over dst using ``coverage`` as straight source alpha."""
    require_same_size(src_rgb_alpha, dst, coverage)
    cov = coverage.values.astype(np.float64)[..., None]
    out = np.empty(dst.pixels.shape, dtype=np.float64)
    out[..., :3] = cov * src_rgb_alpha.pixels[..., :3] + (1.0 - cov) * dst.pixels[..., :3]
    out[..., 3:] = cov * 255.0 + (1.0 - cov) * dst.pixels[..., 3:]
    return RasterImage(np.rint(out).astype(np.uint8))


def flatten(doc: PosterDocument, rendered: Sequence) -> RasterImage:
    """Flatten the document's layer stack onto its resolved background.

    ``rendered`` supplies one RenderedElement per document element, in
    order. Elements with a fresh art layer are blended via their feathered
    mask; all others are alpha-composited from their plain rendering.
    """
    if len(rendered) != len(doc.elements):
        raise ValueError(f"rendered count {len(rendered)} != element count {len(doc.elements)}")
    current = doc.background.resolved()
    for element, plain in zip(doc.elements, rendered):
        layer = doc.art_layer_for(element.id)
        if layer is not None:
            if layer.stale:
                raise StaleArtLayer(
                    f"art layer for element {element.id!r} is stale; re-stylize or remove it"
                )
            mask = gaussian_feather(layer.mask, layer.feather_sigma)
            current = blend(layer.stylized_pixels, current, mask)
        else:
            current = source_over(plain.pixels, current, plain.coverage)
    return current
