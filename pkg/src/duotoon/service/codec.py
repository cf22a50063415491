"""Base64-PNG payload codec shared by the service and the thin CLI client."""

from __future__ import annotations

import base64
import binascii
import io

import numpy as np
from PIL import Image as PILImage

from ..colorspace import ColorSpace, Image


class DecodeError(ValueError):
    """Payload is not decodable base64 PNG."""


def decode_image_b64(payload: str) -> Image:
    """base64 PNG -> RGB Image in [0, 1]."""
    try:
        raw = base64.b64decode(payload, validate=True)
        with PILImage.open(io.BytesIO(raw)) as im:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    except (binascii.Error, OSError, ValueError) as exc:
        raise DecodeError(f"undecodable image payload: {exc}") from exc
    return Image(arr, ColorSpace.RGB)


def decode_mask_b64(payload: str) -> np.ndarray:
    """base64 8-bit grayscale PNG -> (H, W) weights in [0, 1] (value/255)."""
    try:
        raw = base64.b64decode(payload, validate=True)
        with PILImage.open(io.BytesIO(raw)) as im:
            arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    except (binascii.Error, OSError, ValueError) as exc:
        raise DecodeError(f"undecodable mask payload: {exc}") from exc
    return arr


def encode_image_b64(img: Image) -> str:
    img.require(ColorSpace.RGB)
    arr = np.clip(np.rint(img.data * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode="RGB").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode()


def encode_mask_b64(mask: np.ndarray) -> str:
    arr = np.clip(np.rint(np.asarray(mask) * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode()


def parse_hex_color(value: str) -> tuple[float, float, float]:
    text = value.lstrip("#")
    if len(text) != 6:
        raise DecodeError(f"expected #RRGGBB color, got {value!r}")
    try:
        r, g, b = (int(text[i : i + 2], 16) for i in (0, 2, 4))
    except ValueError as exc:
        raise DecodeError(f"expected #RRGGBB color, got {value!r}") from exc
    return (r / 255.0, g / 255.0, b / 255.0)


def format_hex_color(rgb) -> str:
    r, g, b = (int(round(float(c) * 255.0)) for c in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"
