"""Dataset ingestion and training-pair assembly.

A training sample pairs a photo (and its superpixel color cue, jointly
HSV-augmented) with a cartoon crop resized according to the batch's texture
level.  One level is drawn per batch so every cartoon in it shares a
resolution.  Per-sample RNG streams derive from (seed, sample counter), so
the batch sequence for a seed does not depend on how assembly is
parallelized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from . import colorcue, colorspace as cs
from .colorspace import ColorSpace, Image
from .network.presets import DESK_LEVEL_RESOLUTIONS, NetworkConfig

log = logging.getLogger(__name__)

MIN_SOURCE_SIDE = 8
SUPPORTED_SUFFIXES = {".png", ".jpg", ".jpeg"}


class EmptyDatasetError(RuntimeError):
    pass


@dataclass
class DatasetConfig:
    photo_dir: str
    cartoon_dir: str
    photo_size: int = 64
    level_resolutions: tuple[int, ...] = DESK_LEVEL_RESOLUTIONS
    seed: int = 0
    batch_size: int = 8
    cue_segments: int = 32

    def __post_init__(self):
        res = tuple(self.level_resolutions)
        if list(res) != sorted(set(res)):
            raise ValueError("level_resolutions must be strictly increasing")
        self.level_resolutions = res

    @property
    def n_levels(self) -> int:
        return len(self.level_resolutions)

    @classmethod
    def for_network(cls, net_cfg: NetworkConfig, photo_dir, cartoon_dir, **kw) -> "DatasetConfig":
        kw.setdefault("photo_size", net_cfg.photo_size)
        kw.setdefault("level_resolutions", net_cfg.level_resolutions)
        kw.setdefault("cue_segments", net_cfg.cue_segments)
        return cls(photo_dir=str(photo_dir), cartoon_dir=str(cartoon_dir), **kw)


@dataclass
class TrainSample:
    """Photo-side tensors are (C, H, W) float32 at photo_size; the cartoon L
    map is at the sampled level's resolution."""

    photo_lab: np.ndarray  # (3, S, S) normalized Lab of the un-augmented photo
    aug_photo_ab: np.ndarray  # (2, S, S) reconstruction target from the augmented photo
    aug_cue: np.ndarray  # (3, S, S) augmented cue, normalized Lab
    raw_cue: np.ndarray  # (3, S, S) un-augmented cue (target-color fine-tune input)
    cartoon_l: np.ndarray  # (1, R, R) cartoon L at the level resolution
    cartoon_ab: np.ndarray  # (2, S, S) cartoon ab crop at photo size
    level: int


def resolution_for_level(level: int, cfg: DatasetConfig) -> int:
    """1-based texture level -> target cartoon resolution."""
    if not 1 <= level <= cfg.n_levels:
        raise ValueError(f"level {level} outside 1..{cfg.n_levels}")
    return cfg.level_resolutions[level - 1]


# --- image files ------------------------------------------------------------


def load_image(path) -> Image:
    """Decode PNG/JPEG to float RGB in [0, 1].

    Grayscale is replicated to 3 channels; 16-bit PNG scales by 1/65535;
    alpha channels are dropped.
    """
    with PILImage.open(path) as im:
        if im.mode in ("I", "I;16", "I;16B"):
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        else:
            if im.mode not in ("RGB", "L", "RGBA", "LA"):
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.float64) / 255.0
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    elif arr.shape[2] == 2:  # LA
        arr = np.repeat(arr[:, :, 0:1], 3, axis=2)
    elif arr.shape[2] == 4:  # RGBA
        arr = arr[:, :, :3]
    return Image(np.clip(arr, 0.0, 1.0), ColorSpace.RGB)


def save_image(img: Image, path) -> None:
    img.require(ColorSpace.RGB)
    arr = np.clip(np.rint(img.data * 255.0), 0, 255).astype(np.uint8)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    PILImage.fromarray(arr, mode="RGB").save(path)


def resize_image(img: Image, size: tuple[int, int]) -> Image:
    """Bicubic resize to (height, width)."""
    arr = np.clip(img.data, 0.0, 1.0)
    pil = PILImage.fromarray(np.rint(arr * 255.0).astype(np.uint8), mode="RGB")
    resized = pil.resize((size[1], size[0]), PILImage.BICUBIC)
    return Image(np.asarray(resized, dtype=np.float64) / 255.0, ColorSpace.RGB)


def list_dataset(directory, manifest: str | None = None) -> list[Path]:
    """Images under `directory`, sorted; a manifest file (one relative path
    per line) pins an explicit ordering instead."""
    directory = Path(directory)
    if manifest is not None:
        lines = Path(manifest).read_text().splitlines()
        return [directory / line.strip() for line in lines if line.strip()]
    return sorted(
        p for p in directory.iterdir() if p.suffix.lower() in SUPPORTED_SUFFIXES
    )


# --- batch assembly ---------------------------------------------------------


def _to_chw(arr: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(arr.transpose(2, 0, 1).astype(np.float32))


def _random_crop(data: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    h, w = data.shape[:2]
    y = int(rng.integers(0, h - size + 1))
    x = int(rng.integers(0, w - size + 1))
    return data[y : y + size, x : x + size]


class TrainDataPipeline:
    """Deterministic batch stream over photo and cartoon directories."""

    def __init__(self, cfg: DatasetConfig, photo_manifest=None, cartoon_manifest=None):
        self.cfg = cfg
        self.photos = self._probe(list_dataset(cfg.photo_dir, photo_manifest), "photo")
        self.cartoons = self._probe(list_dataset(cfg.cartoon_dir, cartoon_manifest), "cartoon")
        if not self.photos:
            raise EmptyDatasetError(f"no usable photos under {cfg.photo_dir}")
        if not self.cartoons:
            raise EmptyDatasetError(f"no usable cartoons under {cfg.cartoon_dir}")
        self._counter = 0

    @staticmethod
    def _probe(paths: list[Path], kind: str) -> list[Path]:
        usable = []
        for p in paths:
            try:
                img = load_image(p)
            except Exception as exc:
                log.warning("skipping unreadable %s %s: %s", kind, p, exc)
                continue
            if min(img.height, img.width) < MIN_SOURCE_SIDE:
                log.warning("skipping undersized %s %s (%dx%d)", kind, p, img.height, img.width)
                continue
            usable.append(p)
        return usable

    @property
    def counter(self) -> int:
        return self._counter

    @counter.setter
    def counter(self, value: int) -> None:
        self._counter = int(value)

    def _sample_rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng((self.cfg.seed, index))

    def _photo_tensor_group(self, path: Path, rng: np.random.Generator):
        photo = load_image(path)
        size = self.cfg.photo_size
        short = min(photo.height, photo.width)
        scale = size / short
        resized = resize_image(
            photo, (max(size, round(photo.height * scale)), max(size, round(photo.width * scale)))
        )
        photo = Image(_random_crop(resized.data, size, rng), ColorSpace.RGB)

        cue = colorcue.superpixel_colormap(photo, self.cfg.cue_segments)
        p = colorcue.sample_hsv_params(rng)
        aug_photo, aug_cue = colorcue.hsv_augment(photo, cue, p)

        photo_lab = cs.lab_to_net(cs.rgb_to_lab(photo).data)
        aug_lab = cs.lab_to_net(cs.rgb_to_lab(aug_photo).data)
        aug_cue_lab = cs.lab_to_net(cs.rgb_to_lab(aug_cue).data)
        raw_cue_lab = cs.lab_to_net(cs.rgb_to_lab(cue).data)
        return photo_lab, aug_lab[..., 1:3], aug_cue_lab, raw_cue_lab

    def _cartoon_crop(self, path: Path, size: int, rng: np.random.Generator) -> np.ndarray:
        cartoon = load_image(path)
        if min(cartoon.height, cartoon.width) >= size:
            data = _random_crop(cartoon.data, size, rng)
        else:
            data = resize_image(cartoon, (size, size)).data
        return cs.lab_to_net(cs.rgb_to_lab(Image(data, ColorSpace.RGB)).data)

    def next_batch(self, level: int | None = None) -> list[TrainSample]:
        """Assemble the next batch; `level` defaults to a uniform draw."""
        batch_rng = self._sample_rng(self._counter)
        self._counter += 1
        if level is None:
            level = int(batch_rng.integers(1, self.cfg.n_levels + 1))
        resolution = resolution_for_level(level, self.cfg)

        samples = []
        for _ in range(self.cfg.batch_size):
            rng = self._sample_rng(self._counter)
            self._counter += 1
            photo_path = self.photos[int(rng.integers(len(self.photos)))]
            cartoon_path = self.cartoons[int(rng.integers(len(self.cartoons)))]

            photo_lab, aug_ab, aug_cue, raw_cue = self._photo_tensor_group(photo_path, rng)
            cartoon_lab = self._cartoon_crop(cartoon_path, resolution, rng)
            cartoon_ab_lab = self._cartoon_crop(cartoon_path, self.cfg.photo_size, rng)

            samples.append(
                TrainSample(
                    photo_lab=_to_chw(photo_lab),
                    aug_photo_ab=_to_chw(aug_ab),
                    aug_cue=_to_chw(aug_cue),
                    raw_cue=_to_chw(raw_cue),
                    cartoon_l=_to_chw(cartoon_lab[..., 0:1]),
                    cartoon_ab=_to_chw(cartoon_ab_lab[..., 1:3]),
                    level=level,
                )
            )
        return samples


def stack_batch(samples: list[TrainSample]) -> dict[str, np.ndarray]:
    """Batch dict of (B, C, H, W) arrays; every sample must share the level."""
    levels = {s.level for s in samples}
    if len(levels) != 1:
        raise ValueError(f"mixed levels in batch: {sorted(levels)}")
    return {
        "photo_lab": np.stack([s.photo_lab for s in samples]),
        "aug_photo_ab": np.stack([s.aug_photo_ab for s in samples]),
        "aug_cue": np.stack([s.aug_cue for s in samples]),
        "raw_cue": np.stack([s.raw_cue for s in samples]),
        "cartoon_l": np.stack([s.cartoon_l for s in samples]),
        "cartoon_ab": np.stack([s.cartoon_ab for s in samples]),
        "level": np.array(levels.pop()),
    }
