"""Color guidance maps: superpixel color maps, HSV augmentation and palettes.

The color cue fed to the color decoder is a superpixel-smoothed version of
the photo, optionally edited by the user.  Training diversity comes from a
joint HSV augmentation of (photo, cue) that preserves Lab luminance via the
L-caching trick: the L channel of each augmented image is reverted to the
L channel of its un-augmented counterpart.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import colorspace as cs
from .colorspace import ColorSpace, Image

log = logging.getLogger(__name__)

DEFAULT_SEGMENTS = 200
DEFAULT_PALETTE_SIZE = 8
SLIC_COMPACTNESS = 10.0
SLIC_ITERS = 10


@dataclass
class HsvAugParams:
    """Joint HSV perturbation. The same params apply to photo and cue."""

    hue_shift: float  # circular, in [-0.5, 0.5)
    sat_scale: float  # > 0
    val_scale: float  # > 0

    def __post_init__(self):
        if self.sat_scale <= 0 or self.val_scale <= 0:
            raise ValueError("saturation/value scales must be positive")

    @classmethod
    def identity(cls) -> "HsvAugParams":
        return cls(0.0, 1.0, 1.0)


@dataclass
class Palette:
    """Ordered k-means color clusters with their pixel fractions."""

    colors: np.ndarray  # (K, 3) RGB in [0, 1]
    weights: np.ndarray  # (K,), sums to 1
    padded: bool = False  # True when k exceeded the distinct colors


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# --- superpixel color map ---------------------------------------------------


def _slic_grid_centers(h: int, w: int, k: int) -> np.ndarray:
    """Regular grid of k seed positions (row-major), as (k, 2) [y, x]."""
    gw = max(1, int(np.ceil(np.sqrt(k * w / h))))
    gh = int(np.ceil(k / gw))
    ys = (np.arange(gh) + 0.5) * h / gh
    xs = (np.arange(gw) + 0.5) * w / gw
    grid = np.stack(np.meshgrid(ys, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    return grid[:k]


def superpixel_segments(photo: Image, n_segments: int, seed: int = 0) -> np.ndarray:
    """SLIC-style segmentation: k-means in (Lab, xy) with compactness weighting.

    Deterministic: seeds start on a regular grid, so `seed` only matters for
    potential future perturbation strategies and is accepted for interface
    stability.  Returns an (H, W) int label map with labels in [0, n_segments).
    """
    photo.require(ColorSpace.RGB)
    h, w = photo.height, photo.width
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    if n_segments > h * w:
        raise ValueError(f"n_segments={n_segments} exceeds pixel count {h * w}")

    lab = cs.rgb_to_lab(photo).data
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    pos = np.stack([yy, xx], axis=-1)

    step = np.sqrt(h * w / n_segments)
    ratio = SLIC_COMPACTNESS / step

    centers_pos = _slic_grid_centers(h, w, n_segments)
    cy = np.clip(centers_pos[:, 0].astype(int), 0, h - 1)
    cx = np.clip(centers_pos[:, 1].astype(int), 0, w - 1)
    centers_lab = lab[cy, cx].astype(np.float64)
    centers_pos = centers_pos.astype(np.float64)

    labels = np.zeros((h, w), dtype=np.int64)
    for _ in range(SLIC_ITERS):
        dist = np.full((h, w), np.inf)
        new_labels = np.zeros((h, w), dtype=np.int64)
        for ci in range(n_segments):
            y0 = max(0, int(centers_pos[ci, 0] - 2 * step))
            y1 = min(h, int(centers_pos[ci, 0] + 2 * step) + 1)
            x0 = max(0, int(centers_pos[ci, 1] - 2 * step))
            x1 = min(w, int(centers_pos[ci, 1] + 2 * step) + 1)
            d_lab = np.sum((lab[y0:y1, x0:x1] - centers_lab[ci]) ** 2, axis=-1)
            d_pos = np.sum((pos[y0:y1, x0:x1] - centers_pos[ci]) ** 2, axis=-1)
            d = d_lab + d_pos * ratio**2
            win = d < dist[y0:y1, x0:x1]
            dist[y0:y1, x0:x1][win] = d[win]
            new_labels[y0:y1, x0:x1][win] = ci
        # pixels outside every window (possible on extreme aspect ratios)
        # fall back to the globally nearest center
        orphan = ~np.isfinite(dist)
        if orphan.any():
            d_all = (
                np.sum((lab[orphan, None, :] - centers_lab[None]) ** 2, axis=-1)
                + np.sum((pos[orphan, None, :] - centers_pos[None]) ** 2, axis=-1) * ratio**2
            )
            new_labels[orphan] = np.argmin(d_all, axis=-1)
        labels = new_labels
        for ci in range(n_segments):
            mask = labels == ci
            if mask.any():
                centers_lab[ci] = lab[mask].mean(axis=0)
                centers_pos[ci] = pos[mask].mean(axis=0)
    return labels


def segment_mean_fill(photo: Image, labels: np.ndarray) -> Image:
    """Replace every pixel with the mean RGB of its segment."""
    photo.require(ColorSpace.RGB)
    rgb = photo.data
    out = np.empty_like(rgb)
    flat = labels.ravel()
    pix = rgb.reshape(-1, 3)
    n = labels.max() + 1
    sums = np.zeros((n, 3))
    np.add.at(sums, flat, pix)
    counts = np.bincount(flat, minlength=n).astype(np.float64)
    counts[counts == 0] = 1.0
    means = sums / counts[:, None]
    out = means[flat].reshape(rgb.shape)
    return Image(out, ColorSpace.RGB)


def superpixel_colormap(photo: Image, n_segments: int = DEFAULT_SEGMENTS, seed: int = 0) -> Image:
    """Noise-reduced color map: segment the photo, fill segments with means."""
    labels = superpixel_segments(photo, n_segments, seed=seed)
    return segment_mean_fill(photo, labels)


# --- HSV augmentation -------------------------------------------------------


_GAMUT_EPS = 1e-9


def _rgb_in_gamut_preserving_l(lab: np.ndarray) -> np.ndarray:
    """Lab -> RGB, mapping out-of-gamut pixels back by shrinking chroma.

    Plain clamping after the L-cache restore can move L by several units;
    shrinking (a, b) toward the gray axis keeps L (and the hue family) while
    landing inside the sRGB cube.
    """
    rgb = cs.lab_array_to_rgb_unclamped(lab)
    bad = ((rgb < -_GAMUT_EPS) | (rgb > 1.0 + _GAMUT_EPS)).any(axis=-1)
    if not bad.any():
        return np.clip(rgb, 0.0, 1.0)

    l, a, b = lab[bad, 0], lab[bad, 1], lab[bad, 2]
    lo = np.zeros_like(a)
    hi = np.ones_like(a)
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        trial = cs.lab_array_to_rgb_unclamped(np.stack([l, a * mid, b * mid], axis=-1))
        ok = ((trial >= -_GAMUT_EPS) & (trial <= 1.0 + _GAMUT_EPS)).all(axis=-1)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    fitted = cs.lab_array_to_rgb_unclamped(np.stack([l, a * lo, b * lo], axis=-1))
    out = np.clip(rgb, 0.0, 1.0)
    out[bad] = np.clip(fitted, 0.0, 1.0)
    return out


def hsv_shift_image(img: Image, p: HsvAugParams) -> Image:
    """Shift hue circularly and scale S/V (clamped), then restore the input's
    Lab L channel (L-caching)."""
    img.require(ColorSpace.RGB)
    cached_l = cs.rgb_to_lab(img).data[..., 0:1]

    hsv = cs.rgb_to_hsv(img).data.copy()
    hsv[..., 0] = (hsv[..., 0] + p.hue_shift) % 1.0
    hsv[..., 1] = np.clip(hsv[..., 1] * p.sat_scale, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] * p.val_scale, 0.0, 1.0)
    shifted = cs.hsv_to_rgb(Image(hsv, ColorSpace.HSV))

    lab = cs.rgb_to_lab(shifted).data
    lab[..., 0:1] = cached_l
    return Image(_rgb_in_gamut_preserving_l(lab), ColorSpace.RGB)


def hsv_augment(photo: Image, cue: Image, p: HsvAugParams) -> tuple[Image, Image]:
    """Apply the same HSV perturbation to photo and cue, with L-caching."""
    photo.require(ColorSpace.RGB)
    cue.require(ColorSpace.RGB)
    if photo.data.shape != cue.data.shape:
        raise ValueError("photo and cue must share shape")
    return hsv_shift_image(photo, p), hsv_shift_image(cue, p)


def sample_hsv_params(rng) -> HsvAugParams:
    """hue ~ U[-0.5, 0.5), sat ~ U[0.5, 1.5], val ~ U[0.7, 1.3]."""
    g = _as_rng(rng)
    return HsvAugParams(
        hue_shift=float(g.uniform(-0.5, 0.5)),
        sat_scale=float(g.uniform(0.5, 1.5)),
        val_scale=float(g.uniform(0.7, 1.3)),
    )


# --- palettes ---------------------------------------------------------------


def extract_palette(img: Image, k: int = DEFAULT_PALETTE_SIZE, seed: int = 0) -> Palette:
    """K-means palette over RGB pixels, ordered by descending weight.

    If the image has fewer distinct colors than k, the distinct colors are
    returned padded by repetition and the palette is flagged.
    """
    img.require(ColorSpace.RGB)
    if k < 1:
        raise ValueError("k must be >= 1")
    pixels = img.data.reshape(-1, 3)
    return palette_from_pixels(pixels, k, seed)


def palette_from_pixels(pixels: np.ndarray, k: int, seed: int = 0) -> Palette:
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if pixels.shape[0] == 0:
        raise ValueError("no pixels to build a palette from")
    distinct = np.unique(pixels, axis=0)

    if len(distinct) <= k:
        counts = np.array(
            [np.all(pixels == c, axis=1).sum() for c in distinct], dtype=np.float64
        )
        order = np.argsort(-counts, kind="stable")
        colors = distinct[order]
        weights = counts[order] / counts.sum()
        padded = len(distinct) < k
        while len(colors) < k:
            i = len(colors) % len(distinct)
            colors = np.vstack([colors, colors[i]])
            weights = np.append(weights, 0.0)
        return Palette(colors=colors, weights=weights, padded=padded)

    rng = _as_rng(seed)
    centers = distinct[rng.choice(len(distinct), size=k, replace=False)]
    labels = np.zeros(len(pixels), dtype=np.int64)
    for _ in range(100):
        d = np.sum((pixels[:, None, :] - centers[None]) ** 2, axis=-1)
        new_labels = np.argmin(d, axis=1)
        if np.array_equal(new_labels, labels) and _ > 0:
            break
        labels = new_labels
        for ci in range(k):
            mask = labels == ci
            if mask.any():
                centers[ci] = pixels[mask].mean(axis=0)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    order = np.argsort(-counts, kind="stable")
    return Palette(colors=centers[order], weights=counts[order] / counts.sum())


# --- mask-based color transfer ---------------------------------------------


def region_mean_color(img: Image, mask: np.ndarray) -> np.ndarray:
    """Mask-weighted mean RGB of a region."""
    img.require(ColorSpace.RGB)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != img.data.shape[:2]:
        raise ValueError("mask shape must match image")
    total = mask.sum()
    if total <= 0:
        raise ValueError("mask selects no pixels")
    return (img.data * mask[..., None]).sum(axis=(0, 1)) / total


def palette_transfer(cue: Image, mask: np.ndarray, target: np.ndarray) -> Image:
    """Shift the masked region's colors so its mean moves to `target`.

    The shift (target - region_mean) is scaled per pixel by the soft mask and
    the result is clamped to [0, 1]; unmasked pixels are untouched.
    """
    cue.require(ColorSpace.RGB)
    target = np.asarray(target, dtype=np.float64).reshape(3)
    mean = region_mean_color(cue, mask)
    shift = target - mean
    out = cue.data + np.asarray(mask, dtype=np.float64)[..., None] * shift
    return Image(np.clip(out, 0.0, 1.0), ColorSpace.RGB)
