"""Fréchet feature distance between image sets over a pluggable extractor.

Feature statistics accumulate in a streaming, mergeable form (count, mean,
centered second moment), so sharded accumulation equals batch computation
exactly up to float64 rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .colorspace import Image
from .losses import RandomPyramidExtractor

EIG_CLIP = 1e-8


@dataclass
class FeatureStats:
    n: int
    mean: np.ndarray  # (D,)
    cov: np.ndarray  # (D, D), unbiased (n - 1 denominator)

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=np.float64))
        d = self.mean.shape[0]
        if self.cov.shape != (d, d):
            raise ValueError(f"cov shape {self.cov.shape} does not match dimension {d}")
        if self.n < 2:
            raise ValueError("need n >= 2 for a covariance estimate")
        if not (np.isfinite(self.mean).all() and np.isfinite(self.cov).all()):
            raise ValueError("non-finite feature statistics")
        if np.abs(self.cov - self.cov.T).max() > 1e-8:
            raise ValueError("covariance must be symmetric")


class StatsAccumulator:
    """Streaming mean/covariance via the parallel (Chan) update."""

    def __init__(self):
        self.n = 0
        self.mean: np.ndarray | None = None
        self.m2: np.ndarray | None = None

    def add(self, vector: np.ndarray) -> None:
        v = np.asarray(vector, dtype=np.float64).reshape(-1)
        if self.mean is None:
            self.mean = np.zeros_like(v)
            self.m2 = np.zeros((v.size, v.size))
        self.n += 1
        delta = v - self.mean
        self.mean += delta / self.n
        self.m2 += np.outer(delta, v - self.mean)

    def merge(self, other: "StatsAccumulator") -> "StatsAccumulator":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean.copy(), other.m2.copy()
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.m2 = self.m2 + other.m2 + np.outer(delta, delta) * self.n * other.n / n
        self.mean = self.mean + delta * other.n / n
        self.n = n
        return self

    def finalize(self) -> FeatureStats:
        if self.n < 2:
            raise ValueError("need at least two samples")
        cov = self.m2 / (self.n - 1)
        cov = 0.5 * (cov + cov.T)
        return FeatureStats(n=self.n, mean=self.mean.copy(), cov=cov)


def merge_stats(a: FeatureStats, b: FeatureStats) -> FeatureStats:
    """Exact statistics of the union of the two underlying sets."""
    if a.mean.shape != b.mean.shape:
        raise ValueError("dimension mismatch")
    acc_a = StatsAccumulator()
    acc_a.n, acc_a.mean, acc_a.m2 = a.n, a.mean.copy(), a.cov * (a.n - 1)
    acc_b = StatsAccumulator()
    acc_b.n, acc_b.mean, acc_b.m2 = b.n, b.mean.copy(), b.cov * (b.n - 1)
    return acc_a.merge(acc_b).finalize()


# --- feature extraction -----------------------------------------------------


def feature_vector(img: Image | np.ndarray, extractor: nn.Module) -> np.ndarray:
    """One D-vector per image: extractor features, global-average-pooled."""
    data = img.data if isinstance(img, Image) else np.asarray(img)
    x = torch.from_numpy(np.ascontiguousarray(data.transpose(2, 0, 1))[None]).float()
    with torch.no_grad():
        features = extractor(x * 2.0 - 1.0)
    return features.mean(dim=(2, 3))[0].double().numpy()


def accumulate(images, extractor: nn.Module) -> FeatureStats:
    """Streaming statistics over an iterable of RGB images."""
    acc = StatsAccumulator()
    for img in images:
        acc.add(feature_vector(img, extractor))
    if acc.n == 0:
        raise ValueError("empty image set")
    return acc.finalize()


def load_feature_extractor(path=None, seed: int = 0) -> nn.Module:
    """Checkpointed conv-pyramid extractor, or the seeded default.

    The checkpoint is an .npz of "conv{i}.weight"/"conv{i}.bias" arrays
    (OIHW float), applied as stride-1 convs with ReLU and 2x average pooling
    between them.
    """
    if path is None:
        return RandomPyramidExtractor(seed=seed)
    data = np.load(path)
    n_layers = len([k for k in data.files if k.endswith(".weight")])
    extractor = RandomPyramidExtractor(seed=seed)
    convs = []
    for i in range(n_layers):
        w = torch.from_numpy(data[f"conv{i}.weight"]).float()
        conv = nn.Conv2d(w.shape[1], w.shape[0], w.shape[2], padding=w.shape[2] // 2)
        with torch.no_grad():
            conv.weight.copy_(w)
            conv.bias.copy_(torch.from_numpy(data[f"conv{i}.bias"]).float())
        conv.weight.requires_grad_(False)
        conv.bias.requires_grad_(False)
        convs.append(conv)
    extractor.convs = nn.ModuleList(convs)
    return extractor


def save_feature_extractor(path, extractor: RandomPyramidExtractor) -> None:
    arrays = {}
    for i, conv in enumerate(extractor.convs):
        arrays[f"conv{i}.weight"] = conv.weight.detach().numpy()
        arrays[f"conv{i}.bias"] = conv.bias.detach().numpy()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **arrays)


# --- the distance -----------------------------------------------------------


def _sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: FeatureStats, b: FeatureStats) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

    The cross term uses the symmetric form (S_a^1/2 S_b S_a^1/2)^1/2 via
    eigen-decomposition; small negative eigenvalues are clipped to zero.
    """
    if a.mean.shape != b.mean.shape:
        raise ValueError(f"dimension mismatch: {a.mean.shape} vs {b.mean.shape}")
    diff = a.mean - b.mean
    root_a = _sqrt_psd(a.cov)
    inner = root_a @ b.cov @ root_a
    inner = 0.5 * (inner + inner.T)
    vals = np.linalg.eigvalsh(inner)
    vals = np.where(vals < EIG_CLIP, np.clip(vals, 0.0, None), vals)
    cross = 2.0 * np.sqrt(vals).sum()
    dist = float(diff @ diff + np.trace(a.cov) + np.trace(b.cov) - cross)
    return max(dist, 0.0)
