from .registry import BUILTIN_MONO, BUILTIN_SANS, FontRegistry
from .truetype import FontError, TrueTypeFont, flatten_contour

__all__ = ["FontRegistry", "TrueTypeFont", "FontError", "flatten_contour",
           "BUILTIN_MONO", "BUILTIN_SANS"]
