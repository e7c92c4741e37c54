"""RGBA raster buffers and scalar coverage masks, with PNG I/O.

Pixel buffers are numpy-backed and treated as immutable values: every
operation returns a new buffer. Images are 8-bit sRGB RGBA, row-major,
origin top-left. Masks are float32 scalars in [0, 1]; on disk they are
8-bit grayscale PNG (value / 255).
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image


class DimensionMismatch(ValueError):
    """Images/masks that must share dimensions do not."""


# Fixed zlib level so identical pixel data encodes to identical bytes.
_PNG_COMPRESS_LEVEL = 6


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class RasterImage:
    """8-bit RGBA image. ``pixels`` has shape (height, width, 4), dtype uint8."""

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 4:
            raise ValueError(f"expected (h, w, 4) array, got shape {pixels.shape}")
        if pixels.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {pixels.dtype}")
        object.__setattr__(self, "pixels", _freeze(pixels))

    def __setattr__(self, name, value):
        raise AttributeError("RasterImage is immutable")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        return (self.width, self.height)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height})"

    @classmethod
    def blank(cls, width: int, height: int, color: tuple[int, int, int, int] = (0, 0, 0, 0)) -> "RasterImage":
        buf = np.empty((height, width, 4), dtype=np.uint8)
        buf[:, :] = color
        return cls(buf)

    @classmethod
    def from_png_bytes(cls, data: bytes) -> "RasterImage":
        with Image.open(io.BytesIO(data)) as im:
            return cls(np.asarray(im.convert("RGBA"), dtype=np.uint8))

    @classmethod
    def load(cls, path) -> "RasterImage":
        with Image.open(path) as im:
            return cls(np.asarray(im.convert("RGBA"), dtype=np.uint8))

    def to_png_bytes(self) -> bytes:
        im = Image.fromarray(np.asarray(self.pixels), mode="RGBA")
        out = io.BytesIO()
        im.save(out, format="PNG", compress_level=_PNG_COMPRESS_LEVEL, optimize=False)
        return out.getvalue()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_png_bytes())

    def resize_cover(self, width: int, height: int) -> "RasterImage":
        """Scale to cover ``width x height`` then center-crop. Identity if sizes match."""
        if (width, height) == self.size:
            return self
        scale = max(width / self.width, height / self.height)
        new_w = max(width, int(round(self.width * scale)))
        new_h = max(height, int(round(self.height * scale)))
        im = Image.fromarray(np.asarray(self.pixels), mode="RGBA")
        im = im.resize((new_w, new_h), resample=Image.BILINEAR)
        left = (new_w - width) // 2
        top = (new_h - height) // 2
        im = im.crop((left, top, left + width, top + height))
        return RasterImage(np.asarray(im, dtype=np.uint8))


class CoverageMask:
    """Per-pixel scalar in [0, 1]. ``values`` has shape (height, width), dtype float32."""

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float32)
        if values.ndim != 2:
            raise ValueError(f"expected (h, w) array, got shape {values.shape}")
        if values.size and (float(values.min()) < 0.0 or float(values.max()) > 1.0):
            raise ValueError("mask values must lie in [0, 1]")
        object.__setattr__(self, "values", _freeze(values))

    def __setattr__(self, name, value):
        raise AttributeError("CoverageMask is immutable")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def size(self) -> tuple[int, int]:
        return (self.width, self.height)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoverageMask):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.values.shape, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"CoverageMask({self.width}x{self.height})"

    @classmethod
    def zeros(cls, width: int, height: int) -> "CoverageMask":
        return cls(np.zeros((height, width), dtype=np.float32))

    @classmethod
    def full(cls, width: int, height: int, value: float = 1.0) -> "CoverageMask":
        return cls(np.full((height, width), value, dtype=np.float32))

    @classmethod
    def from_alpha(cls, alpha: np.ndarray) -> "CoverageMask":
        """Build from an 8-bit alpha plane; 255 maps to exactly 1.0."""
        return cls(np.asarray(alpha, dtype=np.float32) / np.float32(255.0))

    @classmethod
    def from_png_bytes(cls, data: bytes) -> "CoverageMask":
        with Image.open(io.BytesIO(data)) as im:
            gray = np.asarray(im.convert("L"), dtype=np.uint8)
        return cls.from_alpha(gray)

    @classmethod
    def load(cls, path) -> "CoverageMask":
        with open(path, "rb") as fh:
            return cls.from_png_bytes(fh.read())

    def to_u8(self) -> np.ndarray:
        return np.rint(np.asarray(self.values) * 255.0).astype(np.uint8)

    def to_png_bytes(self) -> bytes:
        im = Image.fromarray(self.to_u8(), mode="L")
        out = io.BytesIO()
        im.save(out, format="PNG", compress_level=_PNG_COMPRESS_LEVEL, optimize=False)
        return out.getvalue()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_png_bytes())


def require_same_size(*items) -> None:
    sizes = {item.size for item in items}
    if len(sizes) > 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(sizes)}")
