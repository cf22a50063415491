"""Texture controller: stroke and abstraction units with continuous levels.

Each unit is a multi-branch stack whose branch outputs are convexly
interpolated by a level value in [1, N]: the two branches nearest the level
are blended by their distances.  Integer levels select a single branch
exactly.  Levels may also be per-pixel maps at feature resolution for
spatially varying control.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .blocks import LEAKY_SLOPE, SharedKernelConv, conv_act


class LevelRangeError(ValueError):
    """Texture level outside [1, N] while extrapolation is disabled."""


@dataclass(frozen=True)
class TextureLevels:
    """Continuous (stroke, abstraction) control levels in [1, N]."""

    alpha_s: float
    alpha_a: float

    def validate(self, n_levels: int, extrapolate: bool = False) -> "TextureLevels":
        if not extrapolate:
            for name, v in (("alpha_s", self.alpha_s), ("alpha_a", self.alpha_a)):
                if not 1.0 <= v <= n_levels:
                    raise LevelRangeError(
                        f"{name}={v} outside [1, {n_levels}] and extrapolation is off"
                    )
        return self


def branch_blend(levels: torch.Tensor | float, n_branches: int):
    """Two-nearest-branch weights for a level in [1, N].

    Returns (k0, t): 0-based lower branch index and fractional weight of the
    upper branch, with out-of-range levels extrapolated linearly from the
    outermost pair.
    """
    if isinstance(levels, torch.Tensor):
        z = levels - 1.0
        k0 = z.floor().clamp(0, n_branches - 2)
        return k0.long(), z - k0
    z = float(levels) - 1.0
    k0 = min(max(int(z // 1), 0), n_branches - 2)
    return k0, z - k0


def level_weights(levels: torch.Tensor, n_branches: int) -> torch.Tensor:
    """Per-pixel branch weights (N, H, W) forming a partition of unity."""
    k0, t = branch_blend(levels, n_branches)
    w = torch.zeros((n_branches,) + levels.shape, dtype=levels.dtype, device=levels.device)
    w.scatter_(0, k0.unsqueeze(0), (1.0 - t).unsqueeze(0))
    w.scatter_(0, (k0 + 1).unsqueeze(0), t.unsqueeze(0))
    return w


class _MultiBranchUnit(nn.Module):
    """Shared blend logic over per-branch feature functions."""

    n_branches: int

    def branch_forward(self, f: torch.Tensor, branch: int) -> torch.Tensor:
        raise NotImplementedError

    def forward(self, f: torch.Tensor, level) -> torch.Tensor:
        if isinstance(level, torch.Tensor) and level.ndim >= 2:
            return self._forward_map(f, level)
        k0, t = branch_blend(float(level), self.n_branches)
        if t == 0.0:
            return self.branch_forward(f, k0)
        if t == 1.0:
            return self.branch_forward(f, k0 + 1)
        lo = self.branch_forward(f, k0)
        hi = self.branch_forward(f, k0 + 1)
        return (1.0 - t) * lo + t * hi

    def _forward_map(self, f: torch.Tensor, level_map: torch.Tensor) -> torch.Tensor:
        if level_map.shape != f.shape[-2:]:
            raise ValueError(
                f"level map shape {tuple(level_map.shape)} != feature grid {tuple(f.shape[-2:])}"
            )
        # weights computed in the map's own precision, cast after: a constant
        # float64 map then blends bit-identically to the scalar path
        w = level_weights(level_map, self.n_branches).to(f.dtype)
        out = torch.zeros_like(f)
        for i in range(self.n_branches):
            wi = w[i]
            if not torch.any(wi != 0):
                continue
            out = out + wi.unsqueeze(0) * self.branch_forward(f, i)
        return out


class StrokeUnit(_MultiBranchUnit):
    """N branches of two consecutive 3x3 convs; all share the input feature."""

    def __init__(self, channels: int, n_branches: int):
        super().__init__()
        self.n_branches = n_branches
        self.branches = nn.ModuleList(
            nn.Sequential(conv_act(channels, channels, 3), conv_act(channels, channels, 3))
            for _ in range(n_branches)
        )

    def branch_forward(self, f, branch):
        return self.branches[branch](f)


class AbstractionUnit(_MultiBranchUnit):
    """Branches with growing kernel sizes realized as crops of one stored kernel."""

    def __init__(self, channels: int, kernel_sizes: tuple[int, ...]):
        super().__init__()
        self.n_branches = len(kernel_sizes)
        self.kernel_sizes = tuple(kernel_sizes)
        self.conv1 = SharedKernelConv(channels, kernel_sizes)
        self.conv2 = SharedKernelConv(channels, kernel_sizes)
        self.act = nn.LeakyReLU(LEAKY_SLOPE)

    def branch_forward(self, f, branch):
        y = self.act(self.conv1(f, branch))
        return self.act(self.conv2(y, branch))

    def param_count(self, shared: bool = True) -> int:
        """Parameter count of this unit; `shared=False` gives the count a
        per-branch (unshared) realization would need."""
        c = self.conv1.weight.shape[0]
        if shared:
            k = max(self.kernel_sizes)
            per_layer = c * c * k * k + c
            return 2 * per_layer
        return 2 * sum(c * c * k * k + c for k in self.kernel_sizes)


class TextureController(nn.Module):
    """Stroke and abstraction units fused by element-wise addition."""

    def __init__(self, channels: int, kernel_sizes: tuple[int, ...]):
        super().__init__()
        self.stroke = StrokeUnit(channels, len(kernel_sizes))
        self.abstraction = AbstractionUnit(channels, kernel_sizes)

    def forward(self, f, alpha_s, alpha_a):
        return self.stroke(f, alpha_s) + self.abstraction(f, alpha_a)
