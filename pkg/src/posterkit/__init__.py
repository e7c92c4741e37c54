"""posterkit: a modular poster composition engine.

Pipeline: background generation (procedural or remote), rule-based or
remote typography planning, deterministic glyph rendering (text is
rendered, never generated), mask-guided blending of stylized art text,
and word-level OCR-consistency evaluation.
"""

from .compositing import StaleArtLayer, blend, default_feather_sigma, flatten, gaussian_feather
from .document import (Alignment, ArtTextLayer, BackgroundLayer, EditCommand,
                       GeneratedSource, InvariantViolation, MoveBox, ParseError,
                       PosterDocument, ProceduralSource, RemoveArtLayer,
                       ReplaceBackground, ResizeBox, Role, SchemaError, SetAlignment,
                       SetColor, SetContent, SetFont, SetFontSize, SetRotation,
                       TextElement, TypographySpec, UnknownElementError, UserSource,
                       apply_edit, deserialize, serialize, validate_document,
                       with_art_layer)
from .errors import InputError
from .fonts import FontRegistry, TrueTypeFont
from .pipeline import (PipelineConfig, PipelineError, PosterRequest, Session,
                       UnsupportedWithoutBackend, new_session, run_pipeline,
                       run_reference_flow, session_edit, session_plan,
                       session_render, session_restyle, session_set_background,
                       session_undo)
from .planner import (BackgroundStats, PlanItem, PlannedItem, PlanRequest, PlanResult,
                      PlannerRules, Unsatisfiable, describe_background,
                      plan_rule_based, plan_remote, repair_layout)
from .raster import CoverageMask, DimensionMismatch, RasterImage
from .textrender import (DoesNotFit, GlyphRun, RenderedElement, layout_glyphs,
                         measure_text, rasterize_element, render_all)

__version__ = "0.1.0"
