"""Building blocks: plain conv+LeakyReLU stacks, ResNeXt blocks and the
shared-kernel conv used by the abstraction unit.

No normalization layers anywhere; every conv is followed by LeakyReLU
except final output layers.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

LEAKY_SLOPE = 0.2


def conv_act(in_ch: int, out_ch: int, kernel: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel, stride=stride, padding=kernel // 2),
        nn.LeakyReLU(LEAKY_SLOPE),
    )


class ResNeXtBlock(nn.Module):
    """Residual block with a grouped 3x3 bottleneck (no normalization)."""

    def __init__(self, channels: int, cardinality: int):
        super().__init__()
        mid = channels // 2
        if mid % cardinality:
            raise ValueError("bottleneck width must be divisible by cardinality")
        self.reduce = nn.Conv2d(channels, mid, 1)
        self.grouped = nn.Conv2d(mid, mid, 3, padding=1, groups=cardinality)
        self.expand = nn.Conv2d(mid, channels, 1)
        self.act = nn.LeakyReLU(LEAKY_SLOPE)

    def forward(self, x):
        y = self.act(self.reduce(x))
        y = self.act(self.grouped(y))
        y = self.expand(y)
        return self.act(x + y)


class SharedKernelConv(nn.Module):
    """One stored K_N x K_N kernel bank serving every branch.

    Branch i convolves with the centered K_i x K_i sub-window of the stored
    kernel, so smaller-kernel branches are literal crops of the largest one
    and stay crops after every training step.
    """

    def __init__(self, channels: int, kernel_sizes: tuple[int, ...]):
        super().__init__()
        self.kernel_sizes = tuple(kernel_sizes)
        k_max = max(kernel_sizes)
        ref = nn.Conv2d(channels, channels, k_max)
        self.weight = nn.Parameter(ref.weight.detach().clone())
        self.bias = nn.Parameter(ref.bias.detach().clone())

    def branch_weight(self, branch: int) -> torch.Tensor:
        """Centered crop of the stored kernel for 0-based `branch`."""
        k = self.kernel_sizes[branch]
        k_max = self.kernel_sizes[-1]
        off = (k_max - k) // 2
        return self.weight[:, :, off : off + k, off : off + k]

    def forward(self, x, branch: int):
        k = self.kernel_sizes[branch]
        return F.conv2d(x, self.branch_weight(branch), self.bias, padding=k // 2)


def assert_no_normalization(module: nn.Module) -> None:
    """Guard used by tests: the architecture must stay normalization-free."""
    banned = (
        nn.modules.batchnorm._BatchNorm,
        nn.GroupNorm,
        nn.LayerNorm,
        nn.modules.instancenorm._InstanceNorm,
    )
    for m in module.modules():
        if isinstance(m, banned):
            raise AssertionError(f"normalization layer found: {m}")
