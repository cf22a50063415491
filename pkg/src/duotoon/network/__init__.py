from .blocks import ResNeXtBlock, SharedKernelConv, assert_no_normalization
from .controller import (
    AbstractionUnit,
    LevelRangeError,
    StrokeUnit,
    TextureController,
    TextureLevels,
    branch_blend,
    level_weights,
)
from .discriminator import ColorDiscriminator, MultiTextureDiscriminator
from .generator import DOWNSAMPLE_FACTOR, ColorDecoder, Encoder, Generator, TextureDecoder
from .model import (
    CartoonModel,
    build_manifest,
    build_model,
    config_from_manifest,
    load_checkpoint,
    read_manifest,
    save_checkpoint,
)
from .params import ParamTree
from .presets import DESK, PAPER, PRESETS, NetworkConfig, get_preset

__all__ = [
    "AbstractionUnit",
    "CartoonModel",
    "ColorDecoder",
    "ColorDiscriminator",
    "DESK",
    "DOWNSAMPLE_FACTOR",
    "Encoder",
    "Generator",
    "LevelRangeError",
    "MultiTextureDiscriminator",
    "NetworkConfig",
    "PAPER",
    "PRESETS",
    "ParamTree",
    "ResNeXtBlock",
    "SharedKernelConv",
    "StrokeUnit",
    "TextureController",
    "TextureDecoder",
    "TextureLevels",
    "assert_no_normalization",
    "branch_blend",
    "build_manifest",
    "build_model",
    "config_from_manifest",
    "get_preset",
    "level_weights",
    "load_checkpoint",
    "read_manifest",
    "save_checkpoint",
]
