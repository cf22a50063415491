"""Synthetic images for the test suite: smooth "photos" and flat-shaded,
outlined "cartoons" with roughly the right domain statistics."""

from pathlib import Path

import numpy as np

from duotoon.colorspace import ColorSpace, Image
from duotoon.dataio import save_image


def make_photo(seed: int, size: int = 96) -> Image:
    """Smooth colored field: upsampled low-frequency noise plus a soft blob."""
    from PIL import Image as PILImage

    rng = np.random.default_rng(seed)
    low = (rng.random((6, 6, 3)) * 255).astype(np.uint8)
    img = np.asarray(
        PILImage.fromarray(low, mode="RGB").resize((size, size), PILImage.BILINEAR),
        dtype=np.float64,
    ) / 255.0

    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    cy, cx = rng.integers(size // 4, 3 * size // 4, size=2)
    r = size / rng.uniform(3, 6)
    blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r**2))
    tint = rng.random(3)
    img = img * (1 - 0.6 * blob[..., None]) + tint * 0.6 * blob[..., None]
    return Image(np.clip(img, 0.0, 1.0), ColorSpace.RGB)


def make_cartoon(seed: int, size: int = 256) -> Image:
    """Flat-shaded rectangles and ellipses with dark outlines."""
    rng = np.random.default_rng(seed)
    img = np.ones((size, size, 3)) * rng.uniform(0.6, 0.95, size=3)
    yy, xx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")

    for _ in range(6):
        color = rng.uniform(0.15, 0.95, size=3)
        if rng.random() < 0.5:
            y0, x0 = rng.integers(0, size - 16, size=2)
            hgt = int(rng.integers(size // 8, size // 2))
            wid = int(rng.integers(size // 8, size // 2))
            inside = (yy >= y0) & (yy < min(size, y0 + hgt)) & (xx >= x0) & (xx < min(size, x0 + wid))
        else:
            cy, cx = rng.integers(size // 8, 7 * size // 8, size=2)
            ry = int(rng.integers(size // 10, size // 3))
            rx = int(rng.integers(size // 10, size // 3))
            inside = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
        img[inside] = color
        # 2px dark outline via erosion difference
        er = inside.copy()
        er[1:] &= inside[:-1]
        er[:-1] &= inside[1:]
        er[:, 1:] &= inside[:, :-1]
        er[:, :-1] &= inside[:, 1:]
        er2 = er.copy()
        er2[1:] &= er[:-1]
        er2[:-1] &= er[1:]
        er2[:, 1:] &= er[:, :-1]
        er2[:, :-1] &= er[:, 1:]
        img[inside & ~er2] = rng.uniform(0.0, 0.15)
    return Image(np.clip(img, 0.0, 1.0), ColorSpace.RGB)


def write_dataset(root, n_photos: int = 8, n_cartoons: int = 8, photo_size: int = 96,
                  cartoon_size: int = 256, seed: int = 0) -> tuple[Path, Path]:
    root = Path(root)
    photo_dir = root / "photos"
    cartoon_dir = root / "cartoons"
    photo_dir.mkdir(parents=True, exist_ok=True)
    cartoon_dir.mkdir(parents=True, exist_ok=True)
    for i in range(n_photos):
        save_image(make_photo(seed + i, photo_size), photo_dir / f"photo_{i:03d}.png")
    for i in range(n_cartoons):
        save_image(make_cartoon(seed + 1000 + i, cartoon_size), cartoon_dir / f"cartoon_{i:03d}.png")
    return photo_dir, cartoon_dir
