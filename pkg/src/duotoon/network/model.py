"""The full trainable bundle and its checkpoint format.

A checkpoint is a single .npz archive mapping parameter-tree leaf paths to
float arrays, plus a JSON manifest under the reserved key "__manifest__"
carrying the architecture (levels, kernel schedule, widths, preset) and a
schema version.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from .discriminator import ColorDiscriminator, MultiTextureDiscriminator
from .generator import Generator
from .params import ParamTree
from .presets import NetworkConfig, get_preset

SCHEMA_VERSION = 1
MANIFEST_KEY = "__manifest__"


class CartoonModel:
    """Generator + discriminators + the named parameter tree."""

    def __init__(self, cfg: NetworkConfig, seed: int | None = None):
        if seed is not None:
            with torch.random.fork_rng():
                torch.manual_seed(seed)
                self._build(cfg)
        else:
            self._build(cfg)

    def _build(self, cfg: NetworkConfig):
        self.cfg = cfg
        self.generator = Generator(cfg)
        self.disc_texture = MultiTextureDiscriminator(cfg)
        self.disc_color = ColorDiscriminator(cfg)
        self.tree = ParamTree(
            {
                "encoder": self.generator.encoder,
                "texture_decoder.stroke_unit": self.generator.texture_decoder.controller.stroke,
                "texture_decoder.abstraction_unit": self.generator.texture_decoder.controller.abstraction,
                "texture_decoder.trunk": self.generator.texture_decoder.trunk,
                "color_decoder": self.generator.color_decoder,
                "disc_texture": self.disc_texture,
                "disc_color": self.disc_color,
            }
        )

    GENERATOR_SUBTREES = (
        "encoder",
        "texture_decoder.stroke_unit",
        "texture_decoder.abstraction_unit",
        "texture_decoder.trunk",
        "color_decoder",
    )

    def eval(self) -> "CartoonModel":
        self.generator.eval()
        self.disc_texture.eval()
        self.disc_color.eval()
        return self

    def train(self) -> "CartoonModel":
        self.generator.train()
        self.disc_texture.train()
        self.disc_color.train()
        return self


def build_manifest(cfg: NetworkConfig, **extras) -> dict:
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "preset": cfg.preset,
        "n_levels": cfg.n_levels,
        "kernel_sizes": list(cfg.kernel_sizes),
        "channels": list(cfg.channels),
        "disc_channels": list(cfg.disc_channels),
        "n_blocks": cfg.n_blocks,
        "cardinality": cfg.cardinality,
        "photo_size": cfg.photo_size,
        "level_resolutions": list(cfg.level_resolutions),
        "cue_segments": cfg.cue_segments,
    }
    manifest.update(extras)
    return manifest


def config_from_manifest(manifest: dict) -> NetworkConfig:
    return NetworkConfig(
        preset=manifest["preset"],
        n_levels=manifest["n_levels"],
        kernel_sizes=tuple(manifest["kernel_sizes"]),
        channels=tuple(manifest["channels"]),
        disc_channels=tuple(manifest["disc_channels"]),
        n_blocks=manifest["n_blocks"],
        cardinality=manifest["cardinality"],
        photo_size=manifest["photo_size"],
        level_resolutions=tuple(manifest["level_resolutions"]),
        cue_segments=manifest.get("cue_segments", 32),
    )


def save_checkpoint(path, model: CartoonModel, **extras) -> None:
    manifest = build_manifest(model.cfg, **extras)
    arrays = model.tree.leaf_arrays()
    arrays[MANIFEST_KEY] = np.frombuffer(
        json.dumps(manifest, sort_keys=True).encode(), dtype=np.uint8
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, **arrays)
    if path.suffix != ".npz":  # np.savez appends .npz when missing
        Path(str(path) + ".npz").replace(path)


def read_manifest(path) -> dict:
    with np.load(path) as data:
        return json.loads(bytes(data[MANIFEST_KEY]).decode())


def load_checkpoint(path) -> tuple[dict, CartoonModel]:
    with np.load(path) as data:
        manifest = json.loads(bytes(data[MANIFEST_KEY]).decode())
        if manifest.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported checkpoint schema: {manifest.get('schema_version')}")
        arrays = {k: data[k] for k in data.files if k != MANIFEST_KEY}
    model = CartoonModel(config_from_manifest(manifest))
    model.tree.load_leaf_arrays(arrays)
    return manifest, model


def build_model(preset: str | NetworkConfig = "desk", seed: int | None = 0) -> CartoonModel:
    cfg = preset if isinstance(preset, NetworkConfig) else get_preset(preset)
    return CartoonModel(cfg, seed=seed)
