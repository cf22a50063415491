"""Shared encoder plus the texture and color decoders."""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from .blocks import LEAKY_SLOPE, ResNeXtBlock, conv_act
from .controller import TextureController, TextureLevels
from .presets import NetworkConfig

DOWNSAMPLE_FACTOR = 4


class Encoder(nn.Module):
    """3-channel Lab input -> feature grid at H/4 x W/4."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        c0, c1, c2 = cfg.channels
        self.stem = conv_act(3, c0, 7)
        self.down1 = conv_act(c0, c1, 3, stride=2)
        self.down2 = conv_act(c1, c2, 3, stride=2)
        self.blocks = nn.Sequential(*(ResNeXtBlock(c2, cfg.cardinality) for _ in range(cfg.n_blocks)))

    def forward(self, x):
        h, w = x.shape[-2:]
        if h % DOWNSAMPLE_FACTOR or w % DOWNSAMPLE_FACTOR:
            raise ValueError(f"spatial size ({h}, {w}) not divisible by {DOWNSAMPLE_FACTOR}")
        y = self.stem(x)
        y = self.down1(y)
        y = self.down2(y)
        return self.blocks(y)


class TextureDecoder(nn.Module):
    """Texture controller -> residual trunk -> bilinear x4 -> 1-channel tanh."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        c0, c1, c2 = cfg.channels
        self.controller = TextureController(c2, cfg.kernel_sizes)
        self.trunk = nn.Sequential(
            *(ResNeXtBlock(c2, cfg.cardinality) for _ in range(cfg.n_blocks)),
            nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
            conv_act(c2, c1, 3),
            nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
            conv_act(c1, c0, 3),
            nn.Conv2d(c0, 1, 7, padding=3),
            nn.Tanh(),
        )

    def forward(self, f, alpha_s, alpha_a):
        return self.trunk(self.controller(f, alpha_s, alpha_a))


class ColorDecoder(nn.Module):
    """Mirror of the texture decoder with the color cue concatenated (3 extra
    channels) before each upsampling stage's first conv."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        c0, c1, c2 = cfg.channels
        self.blocks = nn.Sequential(*(ResNeXtBlock(c2, cfg.cardinality) for _ in range(cfg.n_blocks)))
        self.up1 = conv_act(c2 + 3, c1, 3)
        self.up2 = conv_act(c1 + 3, c0, 3)
        self.final = nn.Sequential(nn.Conv2d(c0, 2, 7, padding=3), nn.Tanh())

    @staticmethod
    def _cue_at(cue, ref):
        if cue.shape[-2:] == ref.shape[-2:]:
            return cue
        return F.interpolate(cue, size=ref.shape[-2:], mode="area")

    def forward(self, f, cue):
        if cue.shape[0] != f.shape[0] or cue.shape[1] != 3:
            raise ValueError(f"cue must be (B, 3, H, W); got {tuple(cue.shape)}")
        y = self.blocks(f)
        y = F.interpolate(y, scale_factor=2, mode="bilinear", align_corners=False)
        y = self.up1(torch.cat([y, self._cue_at(cue, y)], dim=1))
        y = F.interpolate(y, scale_factor=2, mode="bilinear", align_corners=False)
        y = self.up2(torch.cat([y, self._cue_at(cue, y)], dim=1))
        return self.final(y)


class Generator(nn.Module):
    """Full dual-decoder generator operating on normalized Lab tensors."""

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = Encoder(cfg)
        self.texture_decoder = TextureDecoder(cfg)
        self.color_decoder = ColorDecoder(cfg)

    def encode(self, photo_lab):
        return self.encoder(photo_lab)

    def decode_texture(self, f, levels):
        if isinstance(levels, TextureLevels):
            return self.texture_decoder(f, levels.alpha_s, levels.alpha_a)
        alpha_s, alpha_a = levels
        return self.texture_decoder(f, alpha_s, alpha_a)

    def decode_color(self, f, cue_lab):
        return self.color_decoder(f, cue_lab)

    def forward(self, photo_lab, cue_lab, levels):
        f = self.encode(photo_lab)
        return self.decode_texture(f, levels), self.decode_color(f, cue_lab)
