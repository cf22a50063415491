"""Regenerate the golden request fixtures (run from the repo root):

    python3 tests/fixtures/make_golden.py

The payload images are seeded synthetic photos, so the files are stable.
"""

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent))

from duotoon.service import codec  # noqa: E402
from synthdata import make_photo  # noqa: E402

FIXTURE_DIR = Path(__file__).parent


def main():
    photo = make_photo(12345, 64)
    photo_b64 = codec.encode_image_b64(photo)

    mask = np.zeros((64, 64))
    mask[:, 32:] = 1.0
    mask_b64 = codec.encode_mask_b64(mask)

    basic = {
        "image": photo_b64,
        "alpha_s": 2.5,
        "alpha_a": 3.0,
        "mode": "preserve",
        "style": "inku",
    }
    edits = {
        "image": photo_b64,
        "alpha_s": 1.0,
        "alpha_a": 1.0,
        "regions": [{"mask": mask_b64, "alpha_s": 4.0, "alpha_a": 2.0}],
        "color_edits": [
            {"mask": mask_b64, "target_rgb": "#cc6633"},
            {"mask": None, "hsv": {"h": 0.1, "s": 1.1, "v": 1.0}},
        ],
        "mode": "preserve",
        "style": "inku",
    }
    palette = {"image": photo_b64, "k": 8}

    for name, body in (
        ("stylize_basic", basic),
        ("stylize_edits", edits),
        ("palette_basic", palette),
    ):
        path = FIXTURE_DIR / f"{name}.json"
        path.write_text(json.dumps(body, indent=1))
        print("wrote", path)


if __name__ == "__main__":
    main()
