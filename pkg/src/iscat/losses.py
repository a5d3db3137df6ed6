"""Differentiable physics loss: state, data, bound and adaptive-TV terms.

Torch twins of the numpy operator applications, so the composite loss is
differentiable end to end with respect to the predicted currents (and hence
the network weights). The numpy and torch paths are cross-checked against
each other in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .operators import GreenOperators

EPS_TV = 1e-12     # smoothing inside the TV square root
EPS_MEAN = 1e-12   # lower clamp for the adaptive-weight mean
EPS_DENOM = 1e-30  # degenerate per-pixel denominator threshold


@dataclass(frozen=True)
class LossBreakdown:
    """The four loss components and their sum, as plain floats."""

    state: float
    data: float
    bound: float
    tv: float
    total: float

    @classmethod
    def from_parts(cls, state, data, bound, tv):
        return cls(state, data, bound, tv, state + data + bound + tv)


class TorchOperators:
    """Read-only torch mirror of GreenOperators plus fixed problem data."""

    def __init__(
        self,
        ops: GreenOperators,
        e_inc: np.ndarray,
        e_mea: np.ndarray,
        dtype: torch.dtype = torch.float32,
    ):
        cdtype = torch.complex64 if dtype == torch.float32 else torch.complex128
        self.m = ops.m
        self.pad = ops.pad
        self.cdtype = cdtype
        self.kernel_fft = torch.from_numpy(ops.kernel_fft.copy()).to(cdtype)
        self.self_term = complex(ops.self_term)
        self.gs = torch.from_numpy(ops.gs.copy()).to(cdtype)
        self.e_inc = torch.from_numpy(e_inc.copy()).to(cdtype)
        self.e_mea = torch.from_numpy(e_mea.copy()).to(cdtype)
        # same reduction as the loss numerators, so e.g. L_data(J=0) == 1.0
        self.e_inc_norm2 = float((self.e_inc.real ** 2 + self.e_inc.imag ** 2).sum())
        self.e_mea_norm2 = float((self.e_mea.real ** 2 + self.e_mea.imag ** 2).sum())
        if self.e_mea_norm2 == 0.0:
            raise ValueError("measured fields are identically zero")


def apply_gd_torch(t_ops: TorchOperators, x: torch.Tensor) -> torch.Tensor:
    """Batched FFT application of G_D to (n, m, m) complex tensors."""
    m, pad = t_ops.m, t_ops.pad
    xpad = torch.zeros(x.shape[:-2] + (pad, pad), dtype=x.dtype)
    xpad[..., :m, :m] = x
    conv = torch.fft.ifft2(torch.fft.fft2(xpad) * t_ops.kernel_fft)
    return conv[..., m - 1 : 2 * m - 1, m - 1 : 2 * m - 1] + t_ops.self_term * x


def compute_contrast(
    j: torch.Tensor, t_ops: TorchOperators
) -> tuple[torch.Tensor, torch.Tensor]:
    """Total fields and per-pixel least-squares contrast from currents.

    E_tot = E_inc + G_D J per illumination; chi is the pixel-wise minimizer
    of sum_p |J_p - chi E_p|^2. Returns (chi, e_tot); differentiable in J.
    """
    e_tot = t_ops.e_inc + apply_gd_torch(t_ops, j)
    num = (torch.conj(e_tot) * j).sum(dim=0)
    den = (e_tot.real ** 2 + e_tot.imag ** 2).sum(dim=0)
    good = den > EPS_DENOM
    chi = torch.where(good, num / torch.where(good, den, torch.ones_like(den)),
                      torch.zeros_like(num))
    return chi, e_tot


def loss_state(
    j: torch.Tensor, chi: torch.Tensor, e_tot: torch.Tensor, e_inc_norm2: float
) -> torch.Tensor:
    """||J - chi * E_tot||^2 / ||E_inc||^2, summed over illuminations."""
    r = j - chi[None] * e_tot
    return (r.real ** 2 + r.imag ** 2).sum() / e_inc_norm2


def loss_data(j: torch.Tensor, t_ops: TorchOperators) -> torch.Tensor:
    """||G_S J - E_mea||^2 / ||E_mea||^2, summed over illuminations."""
    es = j.reshape(j.shape[0], -1) @ t_ops.gs.T
    r = es - t_ops.e_mea
    return (r.real ** 2 + r.imag ** 2).sum() / t_ops.e_mea_norm2


def loss_bound(chi: torch.Tensor, alpha: float) -> torch.Tensor:
    """alpha * L1 norm of ReLU(1 - Re(eps_r)); eps_r = 1 + chi."""
    return alpha * torch.relu(-chi.real).sum()


def tv_seminorm(u: torch.Tensor, scale=0.0) -> torch.Tensor:
    """Isotropic TV with forward differences over the valid (m-1)^2 range.

    The square root is smoothed with EPS_TV * scale^2 and the flat-region
    baseline sqrt of that same quantity is subtracted per pixel, so constant
    maps score exactly 0 and f(c*u) with scale c*s equals c*f(u) to machine
    precision. ``scale`` should track the magnitude of u (the adaptive TV
    weight passes its mean-|u| normalizer); scale=0 gives the exact,
    non-smoothed seminorm, which is not differentiable at flat pixels.
    """
    dx = u[:-1, 1:] - u[:-1, :-1]
    dy = u[1:, :-1] - u[:-1, :-1]
    smooth = torch.as_tensor(EPS_TV, dtype=u.dtype) * scale * scale
    root = torch.sqrt(dx * dx + dy * dy + smooth)
    return (root - torch.sqrt(smooth)).sum()


def loss_tv(chi: torch.Tensor, beta0: float) -> torch.Tensor:
    """Adaptive TV: beta(u) * f(u) for the real and imaginary parts of chi.

    beta(u) = beta0 / max(mean(|u|), eps); the mean is excluded from
    differentiation (treated as a constant weight) and also sets the TV
    smoothing scale. Both choices are homogeneous in u, keeping the
    product invariant to positive rescaling of the map.
    """
    total = chi.real.new_zeros(())
    for u in (chi.real, chi.imag):
        s = u.abs().mean().detach().clamp(min=EPS_MEAN)
        total = total + (beta0 / s) * tv_seminorm(u, s)
    return total


def total_loss(
    j: torch.Tensor, t_ops: TorchOperators, alpha: float, beta0: float
) -> tuple[torch.Tensor, torch.Tensor, LossBreakdown]:
    """Composite loss on one current prediction.

    Returns (loss_tensor, chi, breakdown); the breakdown holds detached
    float values whose total is the exact sum of the four parts.
    """
    chi, e_tot = compute_contrast(j, t_ops)
    ls = loss_state(j, chi, e_tot, t_ops.e_inc_norm2)
    ld = loss_data(j, t_ops)
    lb = loss_bound(chi, alpha)
    lt = loss_tv(chi, beta0)
    loss = ls + ld + lb + lt
    breakdown = LossBreakdown.from_parts(
        float(ls.detach()), float(ld.detach()), float(lb.detach()), float(lt.detach())
    )
    return loss, chi, breakdown
