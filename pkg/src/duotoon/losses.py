"""Training objectives: adversarial, content, Gram, total-variation and the
color reconstruction / fine-tune losses, plus the perceptual extractor.

The perceptual extractor follows the Caffe convention (0-255 scale, BGR
order, mean subtraction).  When no pretrained weight file is configured, a
seeded random conv pyramid stands in; it is frozen like the real one and
exercises identical loss math.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

log = logging.getLogger(__name__)

CAFFE_BGR_MEANS = (103.939, 116.779, 123.68)

DEFAULT_TEXTURE_WEIGHTS = (1.0, 0.0025, 0.0045, 0.0015)
DEFAULT_COLOR_FINETUNE_WEIGHTS = (1.0, 0.1)


@dataclass(frozen=True)
class LossWeights:
    """(adversarial, content, gram, tv) texture weights and
    (reconstruction, adversarial) color fine-tune weights."""

    texture: tuple[float, float, float, float] = DEFAULT_TEXTURE_WEIGHTS
    color_finetune: tuple[float, float] = DEFAULT_COLOR_FINETUNE_WEIGHTS

    def __post_init__(self):
        if any(w < 0 for w in self.texture) or any(w < 0 for w in self.color_finetune):
            raise ValueError("loss weights must be non-negative")


def caffe_preprocess(x: torch.Tensor) -> torch.Tensor:
    """[-1, 1] input (1 or 3 channels) -> 3-channel BGR, 0-255, mean-subtracted."""
    x = (x + 1.0) * 127.5
    if x.shape[1] == 1:
        x = x.repeat(1, 3, 1, 1)
    x = x.flip(1)
    means = torch.tensor(CAFFE_BGR_MEANS, dtype=x.dtype, device=x.device).view(1, 3, 1, 1)
    return x - means


class RandomPyramidExtractor(nn.Module):
    """Seeded, frozen conv pyramid standing in for the pretrained extractor.

    Mirrors the real extractor's geometry (x8 downsample to the conv4_4
    level) and magnitude: Caffe-convention VGG19 amplifies activations layer
    by layer, so a per-layer gain above 1 keeps the feature scale (and hence
    the balance of the weighted losses) in the same regime.
    """

    def __init__(self, seed: int = 0, channels: tuple[int, ...] = (32, 64, 128, 128), gain: float = 3.0):
        super().__init__()
        convs = []
        with torch.random.fork_rng():
            torch.manual_seed(seed)
            in_ch = 3
            for out_ch in channels:
                conv = nn.Conv2d(in_ch, out_ch, 3, padding=1)
                nn.init.kaiming_normal_(conv.weight, nonlinearity="relu")
                with torch.no_grad():
                    conv.weight.mul_(gain)
                nn.init.zeros_(conv.bias)
                convs.append(conv)
                in_ch = out_ch
        self.convs = nn.ModuleList(convs)
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, net_l: torch.Tensor) -> torch.Tensor:
        x = caffe_preprocess(net_l)
        for i, conv in enumerate(self.convs):
            x = F.relu(conv(x))
            if i < len(self.convs) - 1:
                x = F.avg_pool2d(x, 2)
        return x


_VGG19_PLAN = [
    ("conv1_1", 3, 64), ("conv1_2", 64, 64), ("pool", 0, 0),
    ("conv2_1", 64, 128), ("conv2_2", 128, 128), ("pool", 0, 0),
    ("conv3_1", 128, 256), ("conv3_2", 256, 256), ("conv3_3", 256, 256),
    ("conv3_4", 256, 256), ("pool", 0, 0),
    ("conv4_1", 256, 512), ("conv4_2", 512, 512), ("conv4_3", 512, 512),
    ("conv4_4", 512, 512),
]


class Vgg19Extractor(nn.Module):
    """VGG19 truncated at the conv4_4 feature level, Caffe preprocessing.

    Weights load from an .npz archive keyed "<layer>.weight"/"<layer>.bias"
    (OIHW float arrays), e.g. converted from the classic Caffe release.
    """

    def __init__(self, weights_path):
        super().__init__()
        data = np.load(weights_path)
        self.layers = nn.ModuleList()
        self.plan = []
        for name, in_ch, out_ch in _VGG19_PLAN:
            if name == "pool":
                self.plan.append(("pool", None))
                continue
            conv = nn.Conv2d(in_ch, out_ch, 3, padding=1)
            with torch.no_grad():
                conv.weight.copy_(torch.from_numpy(data[f"{name}.weight"]))
                conv.bias.copy_(torch.from_numpy(data[f"{name}.bias"]))
            self.layers.append(conv)
            self.plan.append(("conv", len(self.layers) - 1))
        for p in self.parameters():
            p.requires_grad_(False)

    def forward(self, net_l: torch.Tensor) -> torch.Tensor:
        x = caffe_preprocess(net_l)
        for kind, idx in self.plan:
            if kind == "pool":
                x = F.max_pool2d(x, 2)
            else:
                x = F.relu(self.layers[idx](x))
        return x


def load_perceptual_extractor(weights_path=None, seed: int = 0) -> nn.Module:
    """Pretrained extractor when a weight file exists, random pyramid otherwise."""
    if weights_path is not None and Path(weights_path).exists():
        return Vgg19Extractor(weights_path)
    if weights_path is not None:
        log.warning(
            "perceptual extractor weights %s not found; using the seeded "
            "random-pyramid extractor",
            weights_path,
        )
    else:
        log.warning("no perceptual extractor weights configured; using the seeded random-pyramid extractor")
    return RandomPyramidExtractor(seed=seed)


# --- adversarial ------------------------------------------------------------


def d_adv_loss(logits_real: torch.Tensor, logits_fake: torch.Tensor) -> torch.Tensor:
    """-[log sigma(D(real)) + log(1 - sigma(D(fake)))], each averaged over patches."""
    real = F.binary_cross_entropy_with_logits(logits_real, torch.ones_like(logits_real))
    fake = F.binary_cross_entropy_with_logits(logits_fake, torch.zeros_like(logits_fake))
    return real + fake


def g_adv_loss(logits_fake: torch.Tensor) -> torch.Tensor:
    """Non-saturating generator objective: -log sigma(D(fake))."""
    return F.binary_cross_entropy_with_logits(logits_fake, torch.ones_like(logits_fake))


def adv_texture_d(disc, real_l: torch.Tensor, fake_l: torch.Tensor, level: int) -> torch.Tensor:
    return d_adv_loss(disc(real_l, level), disc(fake_l.detach(), level))


def adv_texture_g(disc, fake_l: torch.Tensor, level: int) -> torch.Tensor:
    return g_adv_loss(disc(fake_l, level))


def adv_color_d(disc, real_ab: torch.Tensor, fake_ab: torch.Tensor) -> torch.Tensor:
    return d_adv_loss(disc(real_ab), disc(fake_ab.detach()))


def adv_color_g(disc, fake_ab: torch.Tensor) -> torch.Tensor:
    return g_adv_loss(disc(fake_ab))


# --- perceptual -------------------------------------------------------------


def content_loss(extractor, src_l: torch.Tensor, out_l: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference of extractor features."""
    if src_l.shape != out_l.shape:
        raise ValueError(f"shape mismatch: {tuple(src_l.shape)} vs {tuple(out_l.shape)}")
    return (extractor(src_l) - extractor(out_l)).abs().mean()


def gram(features: torch.Tensor) -> torch.Tensor:
    """(B, C, H, W) -> (B, C, C) channel correlations, divided by C*H*W."""
    if features.numel() == 0:
        raise ValueError("empty feature map")
    b, c, h, w = features.shape
    flat = features.reshape(b, c, h * w)
    return flat @ flat.transpose(1, 2) / (c * h * w)


def gram_loss(extractor, target_l: torch.Tensor, out_l: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference of Gram matrices; inputs may differ in size."""
    return (gram(extractor(target_l)) - gram(extractor(out_l))).abs().mean()


# --- pixel-space ------------------------------------------------------------


def tv_loss(img: torch.Tensor) -> torch.Tensor:
    """Mean |forward x-difference| plus mean |forward y-difference|."""
    h, w = img.shape[-2:]
    if h < 2 and w < 2:
        raise ValueError("total variation undefined on a single-pixel image")
    total = img.new_zeros(())
    if w >= 2:
        total = total + (img[..., :, 1:] - img[..., :, :-1]).abs().mean()
    if h >= 2:
        total = total + (img[..., 1:, :] - img[..., :-1, :]).abs().mean()
    return total


def color_recon_loss(target_ab: torch.Tensor, pred_ab: torch.Tensor) -> torch.Tensor:
    if target_ab.shape != pred_ab.shape:
        raise ValueError(f"shape mismatch: {tuple(target_ab.shape)} vs {tuple(pred_ab.shape)}")
    return F.mse_loss(pred_ab, target_ab)


# --- weighted totals --------------------------------------------------------


def total_texture_loss(adv, content, gram_term, tv, weights: LossWeights) -> torch.Tensor:
    w1, w2, w3, w4 = weights.texture
    return w1 * adv + w2 * content + w3 * gram_term + w4 * tv


def color_finetune_loss(recon, adv, weights: LossWeights) -> torch.Tensor:
    w1, w2 = weights.color_finetune
    return w1 * recon + w2 * adv


def texture_loss_components(
    disc,
    extractor,
    src_l: torch.Tensor,
    out_l: torch.Tensor,
    target_l: torch.Tensor,
    level: int,
    weights: LossWeights,
) -> dict[str, torch.Tensor]:
    """All generator-side texture terms plus their weighted total."""
    parts = {
        "adv": adv_texture_g(disc, out_l, level),
        "content": content_loss(extractor, src_l, out_l),
        "gram": gram_loss(extractor, target_l, out_l),
        "tv": tv_loss(out_l),
    }
    parts["total"] = total_texture_loss(
        parts["adv"], parts["content"], parts["gram"], parts["tv"], weights
    )
    return parts
