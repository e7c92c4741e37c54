"""HTTP service for the interactive editing loop.

JSON endpoints mirror the CLI subcommands plus session CRUD and a PNG
preview endpoint. Sessions live in memory; within a session mutating
calls are serialized behind a per-session lock (single writer), while
separate sessions proceed independently. The document tree in every
response is the single source of truth the UI renders from.
"""

from __future__ import annotations

import base64
import threading
from typing import Any

from fastapi import Body, FastAPI, HTTPException, Query, Response

from . import pipeline
from .backends import BackendMalformed, BackendUnavailable
from .compositing import StaleArtLayer
from .document import (DocumentError, InvariantViolation, ParseError, SchemaError,
                       UnknownElementError, document_to_tree, edit_from_tree,
                       serialize)
from .errors import InputError
from .planner import Unsatisfiable, plan_item_from_tree
from .pipeline import (PipelineConfig, PipelineError, PosterRequest, Session,
                       new_session, run_pipeline, session_edit, session_plan,
                       session_render, session_restyle, session_set_background,
                       session_undo)
from .raster import RasterImage


class SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._store_lock = threading.Lock()
        self._previews: dict[tuple[str, int], bytes] = {}

    def add(self, session: Session) -> None:
        with self._store_lock:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def get(self, session_id: str) -> Session:
        with self._store_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return session

    def lock(self, session_id: str) -> threading.Lock:
        with self._store_lock:
            lock = self._locks.get(session_id)
        if lock is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return lock

    def replace(self, session: Session) -> None:
        with self._store_lock:
            self._sessions[session.id] = session

    def preview(self, session: Session, revision_index: int) -> bytes:
        key = (session.id, revision_index)
        with self._store_lock:
            cached = self._previews.get(key)
        if cached is not None:
            return cached
        doc = session.history[revision_index]
        image = pipeline.render_document(doc, session.config)
        png = image.to_png_bytes()
        with self._store_lock:
            if len(self._previews) > 64:
                self._previews.clear()
            self._previews[key] = png
        return png


def _error(status: int, exc: Exception) -> HTTPException:
    return HTTPException(status_code=status, detail=str(exc))


def _wrap_errors(fn):
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except HTTPException:
            raise
        except UnknownElementError as exc:
            raise _error(404, exc)
        except (InvariantViolation, Unsatisfiable, StaleArtLayer) as exc:
            raise _error(409, exc)
        except (InputError, ParseError, SchemaError, ValueError) as exc:
            raise _error(422, exc)
        except (BackendUnavailable, BackendMalformed) as exc:
            raise _error(502, exc)
        except pipeline.UnsupportedWithoutBackend as exc:
            raise _error(501, exc)
        except PipelineError as exc:
            cause = exc.__cause__
            if isinstance(cause, (InputError, ValueError)):
                raise _error(422, exc)
            if isinstance(cause, (BackendUnavailable, BackendMalformed)):
                raise _error(502, exc)
            raise _error(500, exc)
    return inner


def session_view(session: Session) -> dict[str, Any]:
    doc = session.current
    revision_index = session.revision_count - 1
    return {
        "session_id": session.id,
        "stage": session.stage.value,
        "revision": doc.revision,
        "revision_count": session.revision_count,
        "stale_elements": list(doc.stale_elements),
        "document": document_to_tree(doc),
        "preview_url": f"/sessions/{session.id}/preview.png?revision={revision_index}",
    }


def create_app(config: PipelineConfig | None = None) -> FastAPI:
    base_config = config or PipelineConfig()
    app = FastAPI(title="posterkit", version="0.1.0")
    store = SessionStore()
    app.state.store = store
    app.state.config = base_config

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/generate")
    @_wrap_errors
    def generate(payload: dict = Body(...)):
        request, cfg = _parse_generate_payload(payload, base_config)
        doc, image = run_pipeline(request, cfg)
        return {
            "document": document_to_tree(doc),
            "document_text": serialize(doc),
            "image_base64": base64.b64encode(image.to_png_bytes()).decode("ascii"),
        }

    @app.post("/backgrounds/preview")
    @_wrap_errors
    def background_preview(payload: dict = Body(...)):
        from .backends import BackendKind, generate_background, refine_prompt, PromptContext
        prompt = payload.get("prompt")
        if not isinstance(prompt, str) or not prompt.strip():
            raise InputError("prompt must be a non-empty string")
        width = int(payload.get("width", base_config.canvas_width))
        height = int(payload.get("height", base_config.canvas_height))
        seed = int(payload.get("seed", base_config.seed))
        refined = refine_prompt(prompt, PromptContext.BACKGROUND,
                                endpoint=base_config.endpoints.get(BackendKind.PROMPT_REFINER))
        image = generate_background(refined, (width, height), seed,
                                    endpoint=base_config.endpoints.get(BackendKind.BACKGROUND))
        return Response(content=image.to_png_bytes(), media_type="image/png",
                        headers={"X-Seed": str(seed)})

    @app.post("/sessions", status_code=201)
    @_wrap_errors
    def create_session(payload: dict = Body(default={})):
        cfg = _config_with_overrides(base_config, payload)
        session = new_session(cfg)
        store.add(session)
        return session_view(session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(store.get(session_id))

    def _mutate(session_id: str, fn):
        with store.lock(session_id):
            session = store.get(session_id)
            updated = fn(session)
            store.replace(updated)
            return session_view(updated)

    @app.post("/sessions/{session_id}/background")
    @_wrap_errors
    def set_background(session_id: str, payload: dict = Body(...)):
        image = None
        if isinstance(payload.get("image_base64"), str):
            image = RasterImage.from_png_bytes(base64.b64decode(payload["image_base64"]))
        prompt = payload.get("prompt")
        seed = payload.get("seed")
        return _mutate(session_id, lambda s: session_set_background(
            s, prompt=prompt, image=image, seed=None if seed is None else int(seed)))

    @app.post("/sessions/{session_id}/plan")
    @_wrap_errors
    def plan(session_id: str, payload: dict = Body(...)):
        raw_items = payload.get("items")
        if not isinstance(raw_items, list):
            raise InputError("items must be a list")
        items = [plan_item_from_tree(item) for item in raw_items]
        return _mutate(session_id, lambda s: session_plan(
            s, items, style_hint=payload.get("style_hint")))

    @app.post("/sessions/{session_id}/edits")
    @_wrap_errors
    def edit(session_id: str, payload: dict = Body(...)):
        command = edit_from_tree(payload)
        return _mutate(session_id, lambda s: session_edit(s, command))

    @app.post("/sessions/{session_id}/undo")
    @_wrap_errors
    def undo(session_id: str, payload: dict = Body(...)):
        revision = payload.get("revision")
        if not isinstance(revision, int):
            raise InputError("revision must be an integer history index")
        return _mutate(session_id, lambda s: session_undo(s, revision))

    @app.post("/sessions/{session_id}/restyle")
    @_wrap_errors
    def restyle(session_id: str, payload: dict = Body(...)):
        element_id = payload.get("element_id")
        if not isinstance(element_id, str):
            raise InputError("element_id must be a string")
        seed = payload.get("seed")
        return _mutate(session_id, lambda s: session_restyle(
            s, element_id, style_prompt=payload.get("prompt"),
            seed=None if seed is None else int(seed)))

    @app.get("/sessions/{session_id}/preview.png")
    @_wrap_errors
    def preview(session_id: str, revision: int = Query(default=-1)):
        session = store.get(session_id)
        index = revision if revision >= 0 else session.revision_count - 1
        if not (0 <= index < session.revision_count):
            raise _error(422, InputError(f"revision {revision} out of range"))
        png = store.preview(session, index)
        return Response(content=png, media_type="image/png",
                        headers={"X-Revision": str(index)})

    @app.get("/sessions/{session_id}/document")
    def document_text(session_id: str):
        session = store.get(session_id)
        return Response(content=serialize(session.current),
                        media_type="application/json")

    return app


def _config_with_overrides(base: PipelineConfig, payload: dict) -> PipelineConfig:
    from dataclasses import replace
    kwargs = {}
    for key in ("canvas_width", "canvas_height", "seed"):
        if key in payload:
            value = payload[key]
            if not isinstance(value, int) or isinstance(value, bool):
                raise _error(422, InputError(f"{key} must be an integer"))
            kwargs[key] = value
    for key in ("feather_sigma",):
        if key in payload and payload[key] is not None:
            kwargs[key] = float(payload[key])
    if "stylize_title" in payload:
        kwargs["stylize_title"] = bool(payload["stylize_title"])
    return replace(base, **kwargs) if kwargs else base


def _parse_generate_payload(payload: dict, base: PipelineConfig
                            ) -> tuple[PosterRequest, PipelineConfig]:
    cfg = _config_with_overrides(base, payload.get("config", {}) or {})
    raw_items = payload.get("items")
    if not isinstance(raw_items, list):
        raise InputError("items must be a list")
    items = tuple(plan_item_from_tree(item) for item in raw_items)
    background = payload.get("background") or {}
    image = None
    if isinstance(background.get("image_base64"), str):
        image = RasterImage.from_png_bytes(base64.b64decode(background["image_base64"]))
    request = PosterRequest(
        items=items,
        background_prompt=background.get("prompt"),
        background_image=image,
        style_hint=payload.get("style_hint"),
    )
    return request, cfg
