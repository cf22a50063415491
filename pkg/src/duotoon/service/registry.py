"""Checkpoint registry: one style per id, one generator per color mode.

Checkpoints live in a flat directory named "<style>.<mode>.npz"
(e.g. inku.preserve.npz, inku.target.npz).  The registry loads everything
eagerly at startup and is immutable afterwards.
"""

from __future__ import annotations

import logging
from pathlib import Path

from ..inference import InferenceModel, MODES

log = logging.getLogger(__name__)


class UnknownStyleError(KeyError):
    pass


class ModelRegistry:
    def __init__(self, model_dir, allow_extrapolation: bool = False):
        self.model_dir = Path(model_dir)
        self.allow_extrapolation = allow_extrapolation
        self._styles: dict[str, dict[str, InferenceModel]] = {}
        if self.model_dir.is_dir():
            for path in sorted(self.model_dir.glob("*.npz")):
                parts = path.stem.rsplit(".", 1)
                if len(parts) != 2 or parts[1] not in MODES:
                    log.warning("ignoring checkpoint with unrecognized name %s", path.name)
                    continue
                style, mode = parts
                try:
                    model = InferenceModel.from_checkpoint(path)
                except Exception as exc:
                    log.warning("failed to load %s: %s", path, exc)
                    continue
                self._styles.setdefault(style, {})[mode] = model
                log.info("loaded style=%s mode=%s from %s", style, mode, path.name)

    def style_ids(self) -> list[str]:
        return sorted(self._styles)

    def styles(self) -> list[dict]:
        out = []
        for style_id in self.style_ids():
            modes = self._styles[style_id]
            any_model = next(iter(modes.values()))
            n = any_model.n_levels
            out.append(
                {
                    "id": style_id,
                    "name": style_id.replace("_", " ").title(),
                    "modes": sorted(modes),
                    "N": n,
                    "alpha_range": (1.0, float(n)),
                }
            )
        return out

    def get(self, style_id: str) -> dict[str, InferenceModel]:
        try:
            return self._styles[style_id]
        except KeyError:
            raise UnknownStyleError(f"unknown style {style_id!r}") from None
