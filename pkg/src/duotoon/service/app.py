"""HTTP inference service wrapping the core package.

Error bodies are JSON {code, message}: 400 malformed payload or undecodable
image/mask, 404 unknown style or missing mode checkpoint, 413 payload over
the cap, 422 texture level out of range, 500 structured internal error.
"""

from __future__ import annotations

import logging
import time

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import colorcue
from ..colorcue import HsvAugParams
from ..inference import (
    ColorEdit,
    ControlRequest,
    ModeUnavailableError,
    RegionLevels,
    cartoonize,
)
from ..network import LevelRangeError, TextureLevels
from . import codec
from .codec import DecodeError
from .registry import ModelRegistry, UnknownStyleError
from .schemas import (
    PaletteRequest,
    PaletteResponse,
    StyleInfo,
    StylizeRequest,
    StylizeResponse,
)

log = logging.getLogger(__name__)

MAX_PAYLOAD_BYTES = 16 * 1024 * 1024


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(
    model_dir,
    allow_extrapolation: bool = False,
    max_payload_bytes: int = MAX_PAYLOAD_BYTES,
) -> FastAPI:
    registry = ModelRegistry(model_dir, allow_extrapolation=allow_extrapolation)
    app = FastAPI(title="duotoon", version="0.1.0")
    app.state.registry = registry
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.middleware("http")
    async def payload_cap(request: Request, call_next):
        length = request.headers.get("content-length")
        if length is not None and int(length) > max_payload_bytes:
            return _error(413, "payload_too_large", f"payload exceeds {max_payload_bytes} bytes")
        return await call_next(request)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", str(exc.errors()[:3]))

    @app.exception_handler(DecodeError)
    async def on_decode_error(request: Request, exc: DecodeError):
        return _error(400, "bad_payload", str(exc))

    @app.exception_handler(UnknownStyleError)
    async def on_unknown_style(request: Request, exc: UnknownStyleError):
        return _error(404, "unknown_style", str(exc.args[0]))

    @app.exception_handler(ModeUnavailableError)
    async def on_mode_unavailable(request: Request, exc: ModeUnavailableError):
        return _error(404, "mode_unavailable", str(exc.args[0]))

    @app.exception_handler(LevelRangeError)
    async def on_level_range(request: Request, exc: LevelRangeError):
        return _error(422, "level_out_of_range", str(exc))

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return _error(400, "bad_request", str(exc))

    @app.exception_handler(Exception)
    async def on_internal_error(request: Request, exc: Exception):
        log.exception("internal error handling %s", request.url)
        return _error(500, "internal_error", f"{type(exc).__name__}: {exc}")

    @app.get("/api/styles", response_model=list[StyleInfo])
    def list_styles():
        return registry.styles()

    @app.post("/api/stylize", response_model=StylizeResponse)
    def stylize(req: StylizeRequest):
        t0 = time.time()
        models = registry.get(req.style)
        photo = codec.decode_image_b64(req.image)

        regions = None
        if req.regions:
            regions = [
                RegionLevels(
                    mask=codec.decode_mask_b64(r.mask),
                    levels=TextureLevels(r.alpha_s, r.alpha_a),
                )
                for r in req.regions
            ]
        edits = []
        for e in req.color_edits:
            mask = codec.decode_mask_b64(e.mask) if e.mask is not None else None
            if e.target_rgb is not None:
                edits.append(ColorEdit(mask=mask, target_rgb=codec.parse_hex_color(e.target_rgb)))
            else:
                edits.append(
                    ColorEdit(mask=mask, hsv=HsvAugParams(e.hsv.h, e.hsv.s, e.hsv.v))
                )

        control = ControlRequest(
            photo=photo,
            levels=TextureLevels(req.alpha_s, req.alpha_a),
            regions=regions,
            color_edits=edits,
            mode=req.mode,
        )
        model = models.get(req.mode)
        if model is None:
            raise ModeUnavailableError(f"style {req.style!r} has no {req.mode!r} checkpoint")
        out = cartoonize(control, model, allow_extrapolation=registry.allow_extrapolation)
        return StylizeResponse(
            image=codec.encode_image_b64(out),
            timing_ms=round((time.time() - t0) * 1000.0, 3),
            model_version=model.version,
        )

    @app.post("/api/palette", response_model=PaletteResponse)
    def palette(req: PaletteRequest):
        img = codec.decode_image_b64(req.image)
        if req.mask is not None:
            mask = codec.decode_mask_b64(req.mask)
            keep = mask.reshape(-1) > 0.5
            pixels = img.data.reshape(-1, 3)[keep]
            if pixels.size == 0:
                raise ValueError("mask selects no pixels")
            pal = colorcue.palette_from_pixels(pixels, k=req.k)
        else:
            pal = colorcue.extract_palette(img, k=req.k)
        return PaletteResponse(
            colors=[codec.format_hex_color(c) for c in pal.colors],
            weights=[float(w) for w in pal.weights],
        )

    return app
