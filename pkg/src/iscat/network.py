"""Untrained convolutional network predicting induced currents.

Input is a batch of n_tx elements, each with four channels
[Re J0, Im J0, Re eps0, Im eps0] over the grid; output has two channels
interpreted as (Re J, Im J). Three 3x3 convolution stages with channel
widths 16/32/64, each followed by a two-conv residual block and a
LeakyReLU(0.2), then two fully connected layers with dropout.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .forward import CurrentSet
from .scene import ContrastMap

LEAKY_SLOPE = 0.2


class ResidualBlock(nn.Module):
    """Two same-channel 3x3 convs with an identity skip."""

    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)

    def forward(self, x):
        y = self.conv2(torch.nn.functional.leaky_relu(self.conv1(x), LEAKY_SLOPE))
        return x + y


class CurrentNet(nn.Module):
    """Hybrid conv / fully-connected current predictor."""

    def __init__(self, m: int, hidden: int = 512, dropout_p: float = 0.1):
        super().__init__()
        self.m = m
        stages = []
        cin = 4
        for c in (16, 32, 64):
            stages += [
                nn.Conv2d(cin, c, 3, padding=1),
                ResidualBlock(c),
                nn.LeakyReLU(LEAKY_SLOPE),
            ]
            cin = c
        self.features = nn.Sequential(*stages)
        self.fc1 = nn.Linear(64 * m * m, hidden)
        self.dropout = nn.Dropout(dropout_p)
        self.fc2 = nn.Linear(hidden, 2 * m * m)

    def forward(self, x):
        b = x.shape[0]
        y = self.features(x).reshape(b, -1)
        y = self.dropout(torch.nn.functional.leaky_relu(self.fc1(y), LEAKY_SLOPE))
        y = self.fc2(y)
        if not torch.isfinite(y).all():
            raise FloatingPointError("non-finite activations in network output")
        return y.reshape(b, 2, self.m, self.m)


def init_weights(net: nn.Module, seed: int) -> None:
    """Kaiming-uniform (fan-in, leaky_relu gain) weights, zero biases."""
    gen = torch.Generator().manual_seed(seed)
    for module in net.modules():
        if isinstance(module, (nn.Conv2d, nn.Linear)):
            with torch.no_grad():
                fresh = torch.empty_like(module.weight)
                fan_in = module.weight[0].numel()
                gain = torch.nn.init.calculate_gain("leaky_relu", LEAKY_SLOPE)
                bound = gain * (3.0 / fan_in) ** 0.5
                fresh.uniform_(-bound, bound, generator=gen)
                module.weight.copy_(fresh)
                module.bias.zero_()


def parameter_count(net: nn.Module) -> int:
    return sum(p.numel() for p in net.parameters())


def assemble_input(
    j0: CurrentSet, eps0: ContrastMap, dtype: torch.dtype = torch.float32
) -> tuple[torch.Tensor, float]:
    """Stack the BP current and permittivity into the network input batch.

    Channels are [Re J0, Im J0, Re eps0, Im eps0]; the permittivity
    channels are shared across the batch. The J channels are divided by the
    batch maximum |J0| (1.0 when J0 = 0); the scale is returned so network
    outputs can be mapped back to physical currents.
    """
    n = j0.n_illum
    m = j0.values.shape[1]
    if eps0.chi.shape != (m, m):
        raise ValueError("initial permittivity grid does not match currents")
    scale = float(np.max(np.abs(j0.values)))
    if scale == 0.0:
        scale = 1.0
    eps = eps0.eps_r
    batch = np.empty((n, 4, m, m), dtype=np.float64)
    batch[:, 0] = j0.values.real / scale
    batch[:, 1] = j0.values.imag / scale
    batch[:, 2] = eps.real[None]
    batch[:, 3] = eps.imag[None]
    return torch.from_numpy(batch).to(dtype), scale


def output_currents(raw: torch.Tensor, scale: float) -> torch.Tensor:
    """Map the 2-channel network output to complex physical currents."""
    return torch.complex(raw[:, 0], raw[:, 1]) * scale
