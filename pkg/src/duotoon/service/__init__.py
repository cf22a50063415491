from .app import MAX_PAYLOAD_BYTES, create_app
from .codec import (
    DecodeError,
    decode_image_b64,
    decode_mask_b64,
    encode_image_b64,
    encode_mask_b64,
    format_hex_color,
    parse_hex_color,
)
from .registry import ModelRegistry, UnknownStyleError

__all__ = [
    "DecodeError",
    "MAX_PAYLOAD_BYTES",
    "ModelRegistry",
    "UnknownStyleError",
    "create_app",
    "decode_image_b64",
    "decode_mask_b64",
    "encode_image_b64",
    "encode_mask_b64",
    "format_hex_color",
    "parse_hex_color",
]
