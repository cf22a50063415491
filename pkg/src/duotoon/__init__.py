"""duotoon: interactive photo cartoonization with controllable texture and color."""

from .colorspace import ColorSpace, Image
from .inference import ColorEdit, ControlRequest, InferenceModel, cartoonize
from .network import CartoonModel, TextureLevels, build_model, load_checkpoint, save_checkpoint

__version__ = "0.1.0"

__all__ = [
    "CartoonModel",
    "ColorEdit",
    "ColorSpace",
    "ControlRequest",
    "Image",
    "InferenceModel",
    "TextureLevels",
    "build_model",
    "cartoonize",
    "load_checkpoint",
    "save_checkpoint",
    "__version__",
]
