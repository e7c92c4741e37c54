"""Clients for the external generative services, with local fallbacks.

Five backend kinds share one HTTP JSON shape (POST, bearer auth, images
as base64 PNG): background generation, art-text stylization, prompt
refinement, OCR, and experimental text removal. Every call carries an
explicit seed where generation is involved.

Without an endpoint, each operation (except text removal) falls back to
a deterministic local implementation so the whole pipeline runs offline
and bit-reproducibly: a seeded gradient-plus-noise background, a
gradient/outline/shadow stylizer confined to the mask, template prompt
expansion, and an "oracle OCR" that reads words from the document
sidecar (ground truth by construction, for desk-scale evaluation).

Retry policy: transport errors and 5xx responses are retried up to
``endpoint.retries`` times (retries+1 attempts total) before
BackendUnavailable; a reachable endpoint speaking garbage raises
BackendMalformed without retry.
"""

from __future__ import annotations

import base64
import hashlib
import logging
import os
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np
import requests

from .document import PosterDocument
from .errors import InputError
from .raster import CoverageMask, RasterImage

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 30.0
DEFAULT_RETRIES = 2
MAX_RETRIES = 5


class BackendKind(str, Enum):
    BACKGROUND = "background"
    STYLIZER = "stylizer"
    PROMPT_REFINER = "prompt_refiner"
    OCR = "ocr"
    TEXT_REMOVAL = "text_removal"  # experimental; no local fallback
    PLANNER = "planner"  # transport for the design-planner wire contract


class BackendUnavailable(Exception):
    """Transport-level failure after exhausting retries."""


class BackendMalformed(Exception):
    """The backend answered, but not in the documented wire shape."""


@dataclass(frozen=True)
class BackendEndpoint:
    kind: BackendKind
    url: str
    auth_token_env: str | None = None  # env var NAME holding the bearer token
    timeout: float = DEFAULT_TIMEOUT
    retries: int = DEFAULT_RETRIES

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if not (0 <= self.retries <= MAX_RETRIES):
            raise ValueError(f"retries must be in [0, {MAX_RETRIES}]")


ENV_URL_VARS = {
    BackendKind.BACKGROUND: "POSTERKIT_BACKGROUND_URL",
    BackendKind.STYLIZER: "POSTERKIT_STYLIZER_URL",
    BackendKind.PROMPT_REFINER: "POSTERKIT_PROMPT_REFINER_URL",
    BackendKind.OCR: "POSTERKIT_OCR_URL",
    BackendKind.TEXT_REMOVAL: "POSTERKIT_TEXT_REMOVAL_URL",
    BackendKind.PLANNER: "POSTERKIT_PLANNER_URL",
}


def endpoints_from_env(environ=None) -> dict[BackendKind, BackendEndpoint]:
    """Endpoints for every POSTERKIT_*_URL env var that is set."""
    environ = os.environ if environ is None else environ
    endpoints = {}
    for kind, var in ENV_URL_VARS.items():
        url = environ.get(var)
        if url:
            endpoints[kind] = BackendEndpoint(
                kind=kind, url=url,
                auth_token_env=var.replace("_URL", "_TOKEN"),
            )
    return endpoints


def post_json(endpoint: BackendEndpoint, payload: dict, backoff: float = 0.0) -> dict:
    """POST JSON, honoring the endpoint's retry budget; returns parsed JSON."""
    headers = {"Content-Type": "application/json"}
    if endpoint.auth_token_env:
        token = os.environ.get(endpoint.auth_token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
    attempts = endpoint.retries + 1
    last_error: Exception | None = None
    for attempt in range(attempts):
        if attempt and backoff:
            time.sleep(backoff * attempt)
        try:
            response = requests.post(endpoint.url, json=payload, headers=headers,
                                     timeout=endpoint.timeout)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = BackendUnavailable(
                f"{endpoint.kind.value} backend returned {response.status_code}")
            continue
        if response.status_code >= 400:
            raise BackendUnavailable(
                f"{endpoint.kind.value} backend rejected the request "
                f"({response.status_code}): {response.text[:200]}")
        try:
            body = response.json()
        except ValueError as exc:
            raise BackendMalformed(
                f"{endpoint.kind.value} backend returned non-JSON") from exc
        if not isinstance(body, dict):
            raise BackendMalformed(
                f"{endpoint.kind.value} backend returned a non-object JSON body")
        return body
    raise BackendUnavailable(
        f"{endpoint.kind.value} backend unreachable after {attempts} attempts: {last_error}")


def _decode_image(body: dict, kind: BackendKind) -> RasterImage:
    encoded = body.get("image_base64")
    if not isinstance(encoded, str):
        raise BackendMalformed(f"{kind.value} response missing image_base64")
    try:
        return RasterImage.from_png_bytes(base64.b64decode(encoded, validate=True))
    except Exception as exc:
        raise BackendMalformed(f"{kind.value} image payload undecodable: {exc}") from exc


def _encode_image(image: RasterImage) -> str:
    return base64.b64encode(image.to_png_bytes()).decode("ascii")


def _encode_mask(mask: CoverageMask) -> str:
    return base64.b64encode(mask.to_png_bytes()).decode("ascii")


def _rng(prompt: str, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}:{prompt}".encode("utf-8")).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))


# ---------------------------------------------------------------------------
# Background generation

def generate_background(prompt: str, dims: tuple[int, int], seed: int,
                        endpoint: BackendEndpoint | None = None) -> RasterImage:
    """Themed background image of exactly ``dims``.

    Remote responses of the wrong size are resized/center-cropped client
    side. The local fallback is a seeded multi-stop gradient with
    low-frequency value noise, deterministic in (prompt, seed, dims).
    """
    width, height = dims
    if width <= 0 or height <= 0:
        raise InputError("background dims must be positive")
    if endpoint is None:
        return _procedural_background(prompt, dims, seed)
    body = post_json(endpoint, {"prompt": prompt, "width": width, "height": height,
                                "seed": seed})
    image = _decode_image(body, BackendKind.BACKGROUND)
    if image.size != dims:
        log.warning("background backend returned %sx%s for %sx%s request; resizing",
                    image.width, image.height, width, height)
        image = image.resize_cover(width, height)
    return image


def _procedural_background(prompt: str, dims: tuple[int, int], seed: int) -> RasterImage:
    width, height = dims
    rng = _rng(prompt, seed)

    n_stops = int(rng.integers(3, 6))
    stops = rng.integers(24, 232, size=(n_stops, 3)).astype(np.float64)
    diagonal = float(rng.random())  # 0 = vertical, 1 = diagonal

    ys = np.linspace(0.0, 1.0, height)[:, None]
    xs = np.linspace(0.0, 1.0, width)[None, :]
    t = (ys * (1.0 - diagonal * 0.5) + xs * diagonal * 0.5)
    t = t / t.max() if t.max() > 0 else t

    positions = np.linspace(0.0, 1.0, n_stops)
    base = np.empty((height, width, 3), dtype=np.float64)
    for c in range(3):
        base[..., c] = np.interp(t, positions, stops[:, c])

    # low-frequency value noise, bilinearly upsampled
    cell = max(8, min(width, height) // 8)
    gh = height // cell + 2
    gw = width // cell + 2
    grid = rng.random((gh, gw)) * 2.0 - 1.0
    gy = np.arange(height) / cell
    gx = np.arange(width) / cell
    y0 = gy.astype(int)
    x0 = gx.astype(int)
    fy = (gy - y0)[:, None]
    fx = (gx - x0)[None, :]
    noise = (grid[y0][:, x0] * (1 - fy) * (1 - fx)
             + grid[y0][:, x0 + 1] * (1 - fy) * fx
             + grid[y0 + 1][:, x0] * fy * (1 - fx)
             + grid[y0 + 1][:, x0 + 1] * fy * fx)
    amplitude = 14.0 + 10.0 * float(rng.random())
    base += noise[..., None] * amplitude

    out = np.empty((height, width, 4), dtype=np.uint8)
    out[..., :3] = np.clip(np.rint(base), 0, 255).astype(np.uint8)
    out[..., 3] = 255
    return RasterImage(out)


# ---------------------------------------------------------------------------
# Art-text stylization

@dataclass(frozen=True)
class StylizeRequest:
    image: RasterImage  # current flattened poster
    mask: CoverageMask  # element coverage, pre-feather
    prompt: str
    seed: int

    def __post_init__(self):
        if self.image.size != self.mask.size:
            raise ValueError(
                f"image {self.image.size} and mask {self.mask.size} dimensions differ")


def stylize_text(req: StylizeRequest, endpoint: BackendEndpoint | None = None) -> RasterImage:
    """Full-canvas stylized image; only the masked region is used downstream.

    The local fallback fills the mask with a prompt-derived two-color
    vertical gradient plus an inner outline and drop shadow; pixels where
    mask = 0 are returned bit-unchanged.
    """
    if endpoint is None:
        return _stylize_local(req)
    body = post_json(endpoint, {
        "image_base64": _encode_image(req.image),
        "mask_base64": _encode_mask(req.mask),
        "prompt": req.prompt,
        "seed": req.seed,
    })
    image = _decode_image(body, BackendKind.STYLIZER)
    if image.size != req.image.size:
        raise BackendMalformed(
            f"stylizer returned {image.size}, expected {req.image.size}")
    return image


def _shift_bool(mask: np.ndarray, dy: int, dx: int) -> np.ndarray:
    out = np.zeros_like(mask)
    h, w = mask.shape
    ys = slice(max(dy, 0), h + min(dy, 0))
    xs = slice(max(dx, 0), w + min(dx, 0))
    ys_src = slice(max(-dy, 0), h + min(-dy, 0))
    xs_src = slice(max(-dx, 0), w + min(-dx, 0))
    out[ys, xs] = mask[ys_src, xs_src]
    return out


def _erode_bool(mask: np.ndarray, radius: int) -> np.ndarray:
    out = mask.copy()
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dy == 0 and dx == 0:
                continue
            out &= _shift_bool(mask, dy, dx)
    return out


def _stylize_local(req: StylizeRequest) -> RasterImage:
    rng = _rng(req.prompt, req.seed)
    top = rng.integers(96, 256, size=3).astype(np.float64)
    bottom = rng.integers(0, 160, size=3).astype(np.float64)
    outline = rng.integers(0, 96, size=3).astype(np.float64)

    mask = np.asarray(req.mask.values, dtype=np.float64)
    inside = mask > 0.0
    out = req.image.pixels.astype(np.float64).copy()
    if not inside.any():
        return req.image

    rows = np.nonzero(inside.any(axis=1))[0]
    r0, r1 = int(rows[0]), int(rows[-1])
    span = max(r1 - r0, 1)
    t = np.clip((np.arange(mask.shape[0]) - r0) / span, 0.0, 1.0)[:, None]
    styled = np.empty_like(out)
    for c in range(3):
        styled[..., c] = top[c] * (1.0 - t) + bottom[c] * t
    styled[..., 3] = 255.0

    # inner drop shadow: inked pixels not covered when the mask shifts down-right
    shadow = inside & ~_shift_bool(inside, 3, 3)
    styled[shadow, 0] = styled[shadow, 0] * 0.35
    styled[shadow, 1] = styled[shadow, 1] * 0.35
    styled[shadow, 2] = styled[shadow, 2] * 0.35

    # inner outline: within 2 px of the mask edge
    rim = inside & ~_erode_bool(inside, 2)
    styled[rim, 0] = outline[0]
    styled[rim, 1] = outline[1]
    styled[rim, 2] = outline[2]

    weight = mask[..., None]
    blended = weight * styled + (1.0 - weight) * out
    return RasterImage(np.rint(blended).astype(np.uint8))


# ---------------------------------------------------------------------------
# Prompt refinement

class PromptContext(str, Enum):
    BACKGROUND = "background"
    ART_TEXT = "arttext"


_REFINE_TEMPLATES = {
    PromptContext.BACKGROUND: ("{text}, premium poster background, layered composition, "
                               "rich color harmony, no text, high detail"),
    PromptContext.ART_TEXT: ("{text}, expressive display lettering, dramatic lighting, "
                             "crisp edges, cohesive with the poster style"),
}


def refine_prompt(user_text: str, context: PromptContext,
                  background_summary: str | None = None,
                  endpoint: BackendEndpoint | None = None) -> str:
    """Enrich a raw user prompt before a generative call.

    The local fallback is pure template expansion (documented suffix per
    context, background summary spliced in when given) and never fails.
    """
    if not user_text or not user_text.strip():
        raise InputError("user_text must be non-empty")
    if endpoint is not None:
        body = post_json(endpoint, {
            "text": user_text,
            "context": context.value,
            "background_summary": background_summary,
        })
        refined = body.get("refined")
        if not isinstance(refined, str) or not refined:
            raise BackendMalformed("prompt refiner response missing refined text")
        return refined
    refined = _REFINE_TEMPLATES[PromptContext(context)].format(text=user_text.strip())
    if background_summary:
        refined += f", matching background: {background_summary}"
    return refined


# ---------------------------------------------------------------------------
# OCR

@dataclass(frozen=True)
class OcrWord:
    word: str
    confidence: float


def ocr_detect(image: RasterImage, endpoint: BackendEndpoint | None = None,
               sidecar: PosterDocument | None = None) -> list[OcrWord]:
    """Detected words on a poster image.

    With no endpoint this is the oracle OCR: it requires the poster's
    document sidecar and returns exactly the words the renderer drew,
    confidence 1.0 (ground truth by construction; desk-scale evaluation).
    """
    if endpoint is not None:
        body = post_json(endpoint, {"image_base64": _encode_image(image)})
        raw = body.get("words")
        if not isinstance(raw, list):
            raise BackendMalformed("ocr response missing words[]")
        words = []
        for entry in raw:
            if (not isinstance(entry, dict) or not isinstance(entry.get("word"), str)
                    or not isinstance(entry.get("confidence"), (int, float))):
                raise BackendMalformed(f"ocr response entry malformed: {entry!r}")
            words.append(OcrWord(word=entry["word"], confidence=float(entry["confidence"])))
        return words
    if sidecar is None:
        raise InputError("oracle OCR requires the document sidecar (or configure an OCR endpoint)")
    return [OcrWord(word=token, confidence=1.0)
            for element in sidecar.elements
            for token in element.content.split()]


# ---------------------------------------------------------------------------
# Text removal (experimental, remote only)

def remove_text(image: RasterImage, endpoint: BackendEndpoint) -> RasterImage:
    """Image-to-image text removal; no local fallback exists."""
    body = post_json(endpoint, {"image_base64": _encode_image(image)})
    cleaned = _decode_image(body, BackendKind.TEXT_REMOVAL)
    if cleaned.size != image.size:
        raise BackendMalformed(f"text removal returned {cleaned.size}, expected {image.size}")
    return cleaned
