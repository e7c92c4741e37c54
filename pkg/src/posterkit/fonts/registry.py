"""Font registry: maps font ids to parsed fonts, with a guaranteed fallback.

A registry is described on disk by a manifest JSON file::

    {"fallback": "blockmono", "fonts": {"blockmono": "blockmono.ttf", ...}}

Paths are relative to the manifest. The packaged registry ships two
faces generated by scripts/build_test_font.py: ``blockmono`` (fixed
pitch, documented metrics, used by oracle tests) and ``blocksans``
(proportional, kerned).
"""

from __future__ import annotations

import json
import logging
from importlib import resources
from pathlib import Path

from .truetype import FontError, TrueTypeFont

log = logging.getLogger(__name__)

BUILTIN_MONO = "blockmono"
BUILTIN_SANS = "blocksans"


class FontRegistry:
    def __init__(self, fonts: dict[str, TrueTypeFont], fallback_font_id: str):
        if fallback_font_id not in fonts:
            raise FontError(f"fallback font {fallback_font_id!r} not in registry")
        self.fonts = dict(fonts)
        self.fallback_font_id = fallback_font_id

    def __contains__(self, font_id: str) -> bool:
        return font_id in self.fonts

    def resolve(self, font_id: str) -> tuple[str, TrueTypeFont]:
        """Return (actual_id, font); unknown ids fall back with a logged warning."""
        if font_id in self.fonts:
            return font_id, self.fonts[font_id]
        log.warning("font %r not in registry; falling back to %r", font_id, self.fallback_font_id)
        return self.fallback_font_id, self.fonts[self.fallback_font_id]

    @classmethod
    def from_manifest(cls, manifest_path) -> "FontRegistry":
        manifest_path = Path(manifest_path)
        spec = json.loads(manifest_path.read_text(encoding="utf-8"))
        fonts = {
            font_id: TrueTypeFont.from_file(manifest_path.parent / rel)
            for font_id, rel in spec["fonts"].items()
        }
        return cls(fonts, spec["fallback"])

    @classmethod
    def builtin(cls) -> "FontRegistry":
        """The registry packaged with posterkit."""
        assets = resources.files("posterkit.fonts") / "assets"
        spec = json.loads((assets / "manifest.json").read_text(encoding="utf-8"))
        fonts = {
            font_id: TrueTypeFont((assets / rel).read_bytes())
            for font_id, rel in spec["fonts"].items()
        }
        return cls(fonts, spec["fallback"])
