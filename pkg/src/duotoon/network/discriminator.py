"""Patch discriminators: a shared stride-2 trunk with one head per texture
level for the L channel, and a single-head variant for the ab channels."""

from __future__ import annotations

from torch import nn

from .blocks import conv_act
from .presets import NetworkConfig


class PatchTrunk(nn.Module):
    """Three stride-2 convs; output grid is H/8 x W/8."""

    def __init__(self, in_channels: int, widths: tuple[int, int, int]):
        super().__init__()
        d0, d1, d2 = widths
        self.net = nn.Sequential(
            conv_act(in_channels, d0, 3, stride=2),
            conv_act(d0, d1, 3, stride=2),
            conv_act(d1, d2, 3, stride=2),
        )

    def forward(self, x):
        return self.net(x)


class MultiTextureDiscriminator(nn.Module):
    """Realness logits for the L channel, routed through a per-level head."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.n_levels = cfg.n_levels
        self.trunk = PatchTrunk(1, cfg.disc_channels)
        self.heads = nn.ModuleList(
            nn.Conv2d(cfg.disc_channels[2], 1, 1) for _ in range(cfg.n_levels)
        )

    def forward(self, x, level: int):
        if not 1 <= level <= self.n_levels:
            raise ValueError(f"level {level} outside 1..{self.n_levels}")
        return self.heads[level - 1](self.trunk(x))


class ColorDiscriminator(nn.Module):
    """Single-head patch discriminator over ab channels."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.trunk = PatchTrunk(2, cfg.disc_channels)
        self.head = nn.Conv2d(cfg.disc_channels[2], 1, 1)

    def forward(self, x):
        return self.head(self.trunk(x))
