"""Scripted mock server speaking every backend wire protocol.

A test fixture (also runnable standalone via scripts/run_mock_backends.py):
each route answers deterministically, and failure behavior is scripted
per route so retry semantics, malformed payloads, and wrong-size images
are all exercisable against a real HTTP server.

Routes: /background /stylize /refine /ocr /remove_text /plan
"""

from __future__ import annotations

import base64
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from .backends import BackendEndpoint, BackendKind
from .raster import RasterImage

_ROUTE_KINDS = {
    "/background": BackendKind.BACKGROUND,
    "/stylize": BackendKind.STYLIZER,
    "/refine": BackendKind.PROMPT_REFINER,
    "/ocr": BackendKind.OCR,
    "/remove_text": BackendKind.TEXT_REMOVAL,
    "/plan": BackendKind.PLANNER,
}


class MockBackendServer:
    """Start with ``with MockBackendServer(...) as server:`` or call start/stop.

    Scripting knobs:
      fail_first:   {"/background": 2} -> first 2 calls answer 500
      garbage:      routes that answer non-JSON bodies
      wrong_dims:   routes whose image responses use bogus dimensions
      ocr_words:    canned OCR response words
      plan_responses: queue of raw JSON bodies for /plan (popped per call);
                    when exhausted, a simple deterministic plan is produced
    """

    def __init__(self, fail_first=None, garbage=(), wrong_dims=(),
                 ocr_words=None, plan_responses=None):
        self.fail_remaining = dict(fail_first or {})
        self.garbage = set(garbage)
        self.wrong_dims = set(wrong_dims)
        self.ocr_words = list(ocr_words or [])
        self.plan_responses = list(plan_responses or [])
        self.request_counts: dict[str, int] = {}
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle --

    def start(self) -> "MockBackendServer":
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output clean
                pass

            def do_POST(self):
                outer._handle(self)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def endpoint(self, kind: BackendKind, retries: int = 2, timeout: float = 5.0
                 ) -> BackendEndpoint:
        route = next(r for r, k in _ROUTE_KINDS.items() if k == kind)
        return BackendEndpoint(kind=kind, url=self.base_url + route,
                               retries=retries, timeout=timeout)

    # -- request handling --

    def _handle(self, handler: BaseHTTPRequestHandler) -> None:
        route = handler.path.split("?")[0]
        self.request_counts[route] = self.request_counts.get(route, 0) + 1

        if self.fail_remaining.get(route, 0) > 0:
            self.fail_remaining[route] -= 1
            handler.send_response(500)
            handler.end_headers()
            handler.wfile.write(b"scripted failure")
            return
        if route in self.garbage:
            handler.send_response(200)
            handler.send_header("Content-Type", "application/json")
            handler.end_headers()
            handler.wfile.write(b"this is not json {")
            return

        length = int(handler.headers.get("Content-Length", "0"))
        try:
            payload = json.loads(handler.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            handler.send_response(400)
            handler.end_headers()
            return

        try:
            body = self._respond(route, payload)
        except KeyError:
            handler.send_response(404)
            handler.end_headers()
            return
        data = json.dumps(body).encode("utf-8")
        handler.send_response(200)
        handler.send_header("Content-Type", "application/json")
        handler.send_header("Content-Length", str(len(data)))
        handler.end_headers()
        handler.wfile.write(data)

    def _image_b64(self, width: int, height: int, seed: int) -> str:
        rgb = [(seed * 37 + 41) % 256, (seed * 73 + 99) % 256, (seed * 11 + 7) % 256]
        buf = np.empty((height, width, 4), dtype=np.uint8)
        buf[:, :, 0], buf[:, :, 1], buf[:, :, 2], buf[:, :, 3] = (*rgb, 255)
        return base64.b64encode(RasterImage(buf).to_png_bytes()).decode("ascii")

    def _respond(self, route: str, payload: dict) -> dict:
        if route == "/background":
            width, height = payload["width"], payload["height"]
            if route in self.wrong_dims:
                width, height = 96, 96
            return {"image_base64": self._image_b64(width, height, payload.get("seed", 0))}
        if route == "/stylize":
            if route in self.wrong_dims:
                return {"image_base64": self._image_b64(96, 96, payload.get("seed", 0))}
            # tint the masked region: decode, recolor where mask > 0
            image = RasterImage.from_png_bytes(base64.b64decode(payload["image_base64"]))
            from .raster import CoverageMask
            mask = CoverageMask.from_png_bytes(base64.b64decode(payload["mask_base64"]))
            pixels = image.pixels.copy()
            inked = mask.values > 0
            pixels[inked] = [255, 64, 32, 255]
            return {"image_base64": base64.b64encode(
                RasterImage(pixels).to_png_bytes()).decode("ascii")}
        if route == "/refine":
            return {"refined": f"[mock-refined:{payload['context']}] {payload['text']}"}
        if route == "/ocr":
            return {"words": [{"word": w, "confidence": 0.97} for w in self.ocr_words]}
        if route == "/remove_text":
            if route in self.wrong_dims:
                return {"image_base64": self._image_b64(96, 96, 0)}
            return {"image_base64": payload["image_base64"]}  # pass-through
        if route == "/plan":
            if self.plan_responses:
                return self.plan_responses.pop(0)
            return self._default_plan(payload)
        raise KeyError(route)

    def _default_plan(self, payload: dict) -> dict:
        width = payload["canvas"]["width"]
        height = payload["canvas"]["height"]
        items = []
        y = round(0.1 * height)
        for item in payload["items"]:
            box_h = max(20, round(0.08 * height))
            items.append({
                "x": round(0.1 * width), "y": min(y, height - box_h),
                "box_width": round(0.8 * width), "box_height": box_h,
                "font_id": "blocksans", "font_size": round(box_h * 0.6),
                "color": "#FFFFFF" if item["role"] == "title" else "#EEEEEE",
                "alignment": "center", "rotation_deg": 0,
            })
            y += box_h + max(4, round(0.02 * height))
        return {"planner_id": "mock-planner/v1", "items": items}
