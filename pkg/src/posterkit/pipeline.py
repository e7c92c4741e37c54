"""Three-stage pipeline orchestration and editing sessions.

One call runs background generation (or user-image ingest), planning,
deterministic text rendering, optional title stylization, and
flattening, returning both the editable document and the final raster.
With local fallbacks and a fixed seed the whole run is bit-reproducible.

Sessions wrap a document with an append-only revision history for the
interactive loop: every successful command appends a revision, undo
appends a copy of the target revision (history is never truncated), and
re-stylization after edits is always explicit, never automatic.
"""

from __future__ import annotations

import logging
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .backends import (BackendEndpoint, BackendKind, PromptContext, StylizeRequest,
                       generate_background, refine_prompt, remove_text, stylize_text)
from .compositing import default_feather_sigma, flatten
from .document import (ArtTextLayer, BackgroundLayer, EditCommand, GeneratedSource,
                       PosterDocument, ProceduralSource, ReplaceBackground, Role,
                       TextElement, UserSource, apply_edit, require_valid,
                       with_art_layer)
from .errors import InputError
from .fonts import FontRegistry
from .planner import (PlanItem, PlanRequest, describe_background, plan_remote,
                      plan_rule_based)
from .raster import RasterImage
from .textrender import render_all


class PipelineError(Exception):
    """A stage failed; ``stage`` names it and __cause__ carries the original."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


class UnsupportedWithoutBackend(Exception):
    """The flow needs an experimental backend that is not configured."""


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


@dataclass(frozen=True)
class PipelineConfig:
    canvas_width: int = 1024
    canvas_height: int = 1448
    seed: int = 0
    feather_sigma: float | None = None  # None: 2 px at 1024 wide, scaled
    planner: str = "rule"  # "rule" | "remote"
    stylize_title: bool = False
    endpoints: dict[BackendKind, BackendEndpoint] = field(default_factory=dict)
    planner_endpoint: BackendEndpoint | None = None
    font_registry_path: str | None = None

    @property
    def canvas(self) -> tuple[int, int]:
        return (self.canvas_width, self.canvas_height)

    def feather(self) -> float:
        if self.feather_sigma is not None:
            return self.feather_sigma
        return default_feather_sigma(self.canvas_width)

    def load_registry(self) -> FontRegistry:
        if self.font_registry_path:
            return FontRegistry.from_manifest(self.font_registry_path)
        return FontRegistry.builtin()


@dataclass(frozen=True)
class PosterRequest:
    items: tuple[PlanItem, ...]
    background_prompt: str | None = None
    background_image: RasterImage | None = None
    background_image_ref: str | None = None
    style_hint: str | None = None


log = logging.getLogger(__name__)


def _ingest_image(image: RasterImage, canvas: tuple[int, int]) -> RasterImage:
    if image.size != canvas:
        log.warning("ingested image %sx%s resized to canvas %sx%s",
                    image.width, image.height, canvas[0], canvas[1])
    return image.resize_cover(*canvas)


def _resolve_background_stage(request: PosterRequest, config: PipelineConfig
                              ) -> tuple[BackgroundLayer, RasterImage]:
    canvas = config.canvas
    if request.background_image is not None:
        image = _ingest_image(request.background_image, canvas)
        source = UserSource(image_ref=request.background_image_ref or "<user-image>")
        return BackgroundLayer(source=source, pixels=image), image

    prompt = request.background_prompt or "abstract poster background"
    refined = refine_prompt(prompt, PromptContext.BACKGROUND,
                            endpoint=config.endpoints.get(BackendKind.PROMPT_REFINER))
    endpoint = config.endpoints.get(BackendKind.BACKGROUND)
    image = generate_background(refined, canvas, config.seed, endpoint=endpoint)
    if endpoint is None:
        source = ProceduralSource(prompt=refined, seed=config.seed)
    else:
        source = GeneratedSource(prompt=refined, backend_id=endpoint.url, seed=config.seed)
    return BackgroundLayer(source=source, pixels=image), image


def _plan_elements(items, background_image: RasterImage, style_hint,
                   config: PipelineConfig, registry: FontRegistry
                   ) -> tuple[tuple[TextElement, ...], str, tuple[str, ...]]:
    plan_req = PlanRequest(
        canvas_width=config.canvas_width,
        canvas_height=config.canvas_height,
        items=tuple(items),
        background=describe_background(background_image),
        style_hint=style_hint,
    )
    if config.planner == "remote":
        if config.planner_endpoint is None:
            raise InputError("planner='remote' but no planner endpoint configured")
        result = plan_remote(plan_req, config.planner_endpoint, registry=registry)
    else:
        result = plan_rule_based(plan_req, registry=registry)

    counters: dict[str, int] = {}
    elements = []
    for item, planned in zip(plan_req.items, result.items):
        counters[item.role.value] = counters.get(item.role.value, 0) + 1
        elements.append(TextElement(
            id=f"{item.role.value}-{counters[item.role.value]}",
            role=item.role,
            content=item.content,
            typography=planned.spec,
        ))
    return tuple(elements), result.planner_id, result.diagnostics


def _stylize_title(doc: PosterDocument, rendered, style_hint,
                   config: PipelineConfig) -> PosterDocument:
    title = next((el for el in doc.elements if el.role is Role.TITLE), None)
    if title is None:
        return doc
    plain = flatten(doc, rendered)
    title_rendered = rendered[list(doc.elements).index(title)]
    style_prompt = refine_prompt(
        style_hint or title.content, PromptContext.ART_TEXT,
        endpoint=config.endpoints.get(BackendKind.PROMPT_REFINER))
    stylized = stylize_text(
        StylizeRequest(image=plain, mask=title_rendered.coverage,
                       prompt=style_prompt, seed=config.seed),
        endpoint=config.endpoints.get(BackendKind.STYLIZER))
    layer = ArtTextLayer(
        element_id=title.id,
        style_prompt=style_prompt,
        mask=title_rendered.coverage,
        stylized_pixels=stylized,
        feather_sigma=config.feather(),
    )
    return with_art_layer(doc, layer)


def run_pipeline(request: PosterRequest, config: PipelineConfig
                 ) -> tuple[PosterDocument, RasterImage]:
    """Background -> planning -> rendering (-> title stylization) -> flatten."""
    registry = config.load_registry()

    with _stage("background"):
        background, bg_image = _resolve_background_stage(request, config)

    with _stage("planning"):
        elements, planner_id, diagnostics = _plan_elements(
            request.items, bg_image, request.style_hint, config, registry)
        doc = require_valid(PosterDocument(
            canvas_width=config.canvas_width,
            canvas_height=config.canvas_height,
            background=background,
            elements=elements,
            metadata={
                "revision": "0",
                "seed": str(config.seed),
                "planner": planner_id,
                "stage": "planning",
            },
        ))

    with _stage("render"):
        rendered = render_all(registry, doc)

    if config.stylize_title:
        with _stage("stylization"):
            doc = _stylize_title(doc, rendered, request.style_hint, config)

    with _stage("flatten"):
        doc = doc.with_metadata(stage="done")
        final = flatten(doc, rendered)
    return doc, final


def run_reference_flow(reference_image: RasterImage, items, config: PipelineConfig
                       ) -> tuple[PosterDocument, RasterImage]:
    """Reference-based generation: strip the reference's text, describe it,
    then plan/render against the cleaned background."""
    removal = config.endpoints.get(BackendKind.TEXT_REMOVAL)
    if removal is None:
        raise UnsupportedWithoutBackend(
            "reference-based generation needs a text_removal endpoint")
    registry = config.load_registry()

    with _stage("text-removal"):
        ingested = _ingest_image(reference_image, config.canvas)
        cleaned = remove_text(ingested, removal)

    with _stage("describe"):
        stats = describe_background(cleaned)
        mean_lum = sum(sum(row) for row in stats.luminance_grid) / (len(stats.luminance_grid) ** 2)
        summary = (f"dominant colors {', '.join(stats.dominant_colors)}; "
                   f"mean luminance {mean_lum:.2f}")
        description = refine_prompt(
            "reference poster background", PromptContext.BACKGROUND,
            background_summary=summary,
            endpoint=config.endpoints.get(BackendKind.PROMPT_REFINER))

    background = BackgroundLayer(
        source=GeneratedSource(prompt=description, backend_id=f"text-removal:{removal.url}",
                               seed=config.seed),
        pixels=cleaned,
    )
    with _stage("planning"):
        elements, planner_id, _ = _plan_elements(items, cleaned, description, config, registry)
        doc = require_valid(PosterDocument(
            canvas_width=config.canvas_width,
            canvas_height=config.canvas_height,
            background=background,
            elements=elements,
            metadata={"revision": "0", "seed": str(config.seed),
                      "planner": planner_id, "stage": "planning",
                      "reference_description": description},
        ))

    with _stage("render"):
        rendered = render_all(registry, doc)

    if config.stylize_title:
        with _stage("stylization"):
            doc = _stylize_title(doc, rendered, description, config)

    with _stage("flatten"):
        doc = doc.with_metadata(stage="done")
        final = flatten(doc, rendered)
    return doc, final


def resolve_background(doc: PosterDocument, config: PipelineConfig,
                       base_dir=None) -> PosterDocument:
    """Ensure doc.background.pixels is resolved (generate/load as needed)."""
    if doc.background.pixels is not None:
        return doc
    source = doc.background.source
    canvas = (doc.canvas_width, doc.canvas_height)
    if isinstance(source, ProceduralSource):
        image = generate_background(source.prompt, canvas, source.seed, endpoint=None)
    elif isinstance(source, GeneratedSource):
        endpoint = config.endpoints.get(BackendKind.BACKGROUND)
        if endpoint is None:
            raise InputError(
                "document background was remotely generated; configure a background "
                "endpoint or replace the background to render it")
        image = generate_background(source.prompt, canvas, source.seed, endpoint=endpoint)
    else:
        path = Path(base_dir) / source.image_ref if base_dir else Path(source.image_ref)
        image = RasterImage.load(path).resize_cover(*canvas)
    return replace(doc, background=doc.background.with_pixels(image))


def render_document(doc: PosterDocument, config: PipelineConfig,
                    base_dir=None) -> RasterImage:
    """Re-render a document to its final raster (flatten of all layers)."""
    doc = resolve_background(doc, config, base_dir=base_dir)
    registry = config.load_registry()
    rendered = render_all(registry, doc)
    return flatten(doc, rendered)


# ---------------------------------------------------------------------------
# Sessions

class Stage(str, Enum):
    BACKGROUND = "background"
    PLANNING = "planning"
    STYLIZATION = "stylization"
    DONE = "done"


_STAGE_ORDER = [Stage.BACKGROUND, Stage.PLANNING, Stage.STYLIZATION, Stage.DONE]


@dataclass(frozen=True)
class Session:
    id: str
    history: tuple[PosterDocument, ...]
    stage: Stage
    config: PipelineConfig

    @property
    def current(self) -> PosterDocument:
        return self.history[-1]

    @property
    def revision_count(self) -> int:
        return len(self.history)

    def _advance(self, stage: Stage) -> "Stage":
        # stages move forward only; edits re-enter without moving back
        if _STAGE_ORDER.index(stage) > _STAGE_ORDER.index(self.stage):
            return stage
        return self.stage


def new_session(config: PipelineConfig) -> Session:
    doc = require_valid(PosterDocument(
        canvas_width=config.canvas_width,
        canvas_height=config.canvas_height,
        background=BackgroundLayer(
            source=ProceduralSource(prompt="placeholder", seed=config.seed)),
        metadata={"revision": "0", "seed": str(config.seed)},
    ))
    return Session(id=uuid.uuid4().hex, history=(doc,), stage=Stage.BACKGROUND,
                   config=config)


def _append(session: Session, doc: PosterDocument, stage: Stage | None = None) -> Session:
    return replace(session, history=session.history + (doc,),
                   stage=session._advance(stage) if stage else session.stage)


def session_set_background(session: Session, prompt: str | None = None,
                           image: RasterImage | None = None,
                           image_ref: str | None = None,
                           seed: int | None = None) -> Session:
    """Commit a background (generated from a prompt+seed, or user-provided)."""
    config = session.config
    seed = config.seed if seed is None else seed
    if image is not None:
        resolved = _ingest_image(image, config.canvas)
        source = UserSource(image_ref=image_ref or "<user-image>")
    elif prompt:
        refined = refine_prompt(prompt, PromptContext.BACKGROUND,
                                endpoint=config.endpoints.get(BackendKind.PROMPT_REFINER))
        endpoint = config.endpoints.get(BackendKind.BACKGROUND)
        resolved = generate_background(refined, config.canvas, seed, endpoint=endpoint)
        if endpoint is None:
            source = ProceduralSource(prompt=refined, seed=seed)
        else:
            source = GeneratedSource(prompt=refined, backend_id=endpoint.url, seed=seed)
    else:
        raise InputError("set_background needs a prompt or an image")
    doc = apply_edit(session.current, ReplaceBackground(source=source))
    doc = replace(doc, background=doc.background.with_pixels(resolved))
    doc = doc.with_metadata(background_seed=str(seed))
    return _append(session, doc, Stage.PLANNING)


def session_plan(session: Session, items, style_hint: str | None = None) -> Session:
    """Plan typography for the given items against the committed background."""
    if session.stage is Stage.BACKGROUND:
        raise InputError("select a background before planning")
    config = session.config
    registry = config.load_registry()
    doc = resolve_background(session.current, config)
    elements, planner_id, _ = _plan_elements(items, doc.background.resolved(),
                                             style_hint, config, registry)
    doc = replace(doc, elements=elements, art_layers=())
    doc = doc.with_metadata(revision=str(session.current.revision + 1),
                            planner=planner_id, stale_elements=None)
    return _append(session, require_valid(doc), Stage.STYLIZATION)


def session_edit(session: Session, edit: EditCommand) -> Session:
    """Apply one document edit; stale art layers are NOT re-stylized
    automatically (use session_restyle)."""
    return _append(session, apply_edit(session.current, edit))


def session_undo(session: Session, revision_index: int) -> Session:
    """Revert to history[revision_index] by appending a copy of it."""
    if not (0 <= revision_index < len(session.history)):
        raise InputError(f"revision {revision_index} out of range")
    target = session.history[revision_index]
    target = target.with_metadata(revision=str(session.current.revision + 1))
    return _append(session, target)


def session_restyle(session: Session, element_id: str, style_prompt: str | None = None,
                    seed: int | None = None) -> Session:
    """Explicitly (re-)stylize one element through the stylizer backend."""
    config = session.config
    doc = resolve_background(session.current, config)
    element = doc.element(element_id)
    registry = config.load_registry()
    rendered = render_all(registry, replace(doc, art_layers=()))
    index = [el.id for el in doc.elements].index(element_id)
    base = flatten(replace(doc, art_layers=()), rendered)
    prompt = refine_prompt(style_prompt or element.content, PromptContext.ART_TEXT,
                           endpoint=config.endpoints.get(BackendKind.PROMPT_REFINER))
    stylized = stylize_text(
        StylizeRequest(image=base, mask=rendered[index].coverage, prompt=prompt,
                       seed=config.seed if seed is None else seed),
        endpoint=config.endpoints.get(BackendKind.STYLIZER))
    doc = with_art_layer(doc, ArtTextLayer(
        element_id=element_id, style_prompt=prompt, mask=rendered[index].coverage,
        stylized_pixels=stylized, feather_sigma=config.feather()))
    return _append(session, doc, Stage.DONE)


def session_render(session: Session) -> RasterImage:
    return render_document(session.current, session.config)
