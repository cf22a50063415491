"""Named parameter subtrees with per-subtree freeze flags.

The canonical subtree names are:

    encoder
    texture_decoder.stroke_unit
    texture_decoder.abstraction_unit
    texture_decoder.trunk
    color_decoder
    disc_texture
    disc_color

Freezing a subtree guarantees its leaves stay bitwise unchanged across
optimizer steps (frozen leaves are excluded from autograd and from the
optimizer's parameter list).
"""

from __future__ import annotations

import hashlib

import numpy as np
import torch
from torch import nn


class ParamTree:
    def __init__(self, subtrees: dict[str, nn.Module]):
        self._subtrees = dict(subtrees)
        self._frozen: set[str] = set()

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._subtrees)

    def _resolve(self, name: str) -> nn.Module:
        try:
            return self._subtrees[name]
        except KeyError:
            raise KeyError(f"unknown subtree {name!r}; have {sorted(self._subtrees)}") from None

    def freeze(self, *names: str) -> None:
        for name in names:
            module = self._resolve(name)
            for p in module.parameters():
                p.requires_grad_(False)
            self._frozen.add(name)

    def unfreeze(self, *names: str) -> None:
        for name in names:
            module = self._resolve(name)
            for p in module.parameters():
                p.requires_grad_(True)
            self._frozen.discard(name)

    def freeze_all_except(self, *keep: str) -> None:
        for k in keep:
            self._resolve(k)
        self.freeze(*(n for n in self._subtrees if n not in keep))
        self.unfreeze(*keep)

    def frozen(self) -> frozenset[str]:
        return frozenset(self._frozen)

    def is_frozen(self, name: str) -> bool:
        self._resolve(name)
        return name in self._frozen

    def parameters(self, names=None, trainable_only: bool = False):
        seen = set()
        for name in names if names is not None else self._subtrees:
            for p in self._resolve(name).parameters():
                if id(p) in seen:
                    continue
                seen.add(id(p))
                if trainable_only and not p.requires_grad:
                    continue
                yield p

    def leaf_arrays(self, names=None) -> dict[str, np.ndarray]:
        """Leaf path -> float array copy (detached)."""
        out = {}
        for name in names if names is not None else self._subtrees:
            module = self._resolve(name)
            for pname, p in module.named_parameters():
                out[f"{name}/{pname}"] = p.detach().cpu().numpy().copy()
        return out

    def leaf_hashes(self, names=None) -> dict[str, str]:
        return {
            path: hashlib.sha256(arr.tobytes()).hexdigest()
            for path, arr in self.leaf_arrays(names).items()
        }

    def load_leaf_arrays(self, arrays: dict[str, np.ndarray], strict: bool = True) -> None:
        expected = self.leaf_arrays()
        missing = set(expected) - set(arrays)
        extra = set(arrays) - set(expected)
        if strict and (missing or extra):
            raise ValueError(f"leaf mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        with torch.no_grad():
            for name, module in self._subtrees.items():
                for pname, p in module.named_parameters():
                    path = f"{name}/{pname}"
                    if path not in arrays:
                        continue
                    src = np.asarray(arrays[path])
                    if tuple(src.shape) != tuple(p.shape):
                        raise ValueError(f"shape mismatch at {path}: {src.shape} vs {tuple(p.shape)}")
                    p.copy_(torch.from_numpy(src).to(p.dtype))
