"""Reconstruction loop: per-measurement optimization of the current net.

No training dataset is involved: the network weights are optimized against
the physics loss for one set of measured scattered fields, and the final
permittivity map is read off a deterministic eval-mode pass.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import torch

from .bp import bp_current, bp_permittivity
from .forward import FieldSet, incident_fields
from .losses import LossBreakdown, TorchOperators, compute_contrast, total_loss
from .network import (
    CurrentNet,
    assemble_input,
    init_weights,
    output_currents,
    parameter_count,
)
from .operators import GreenOperators, build_operators
from .scene import ContrastMap, Grid, ImagingSetup

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer, loss-weight and architecture settings for one run."""

    lr0: float = 1e-3
    halve_every: int = 1000
    max_epochs: int = 1500
    alpha: float = 1e-4
    beta0: float = 1e-5
    dropout_p: float = 0.1
    hidden: int = 512
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    dtype: str = "float32"  # "float32" or "float64"
    strict_deterministic: bool = False
    log_every: int = 0  # 0 disables progress logging

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.alpha < 0 or self.beta0 < 0:
            raise ValueError("alpha and beta0 must be non-negative")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    @property
    def torch_dtype(self) -> torch.dtype:
        return torch.float32 if self.dtype == "float32" else torch.float64


def lr_schedule(cfg: TrainConfig, epoch: int) -> float:
    """Learning rate at a given epoch: lr0 halved every `halve_every`."""
    return cfg.lr0 * 0.5 ** (epoch // cfg.halve_every)


@dataclass(frozen=True)
class ReconstructionResult:
    eps_r_pre: ContrastMap
    eps_r_bp: ContrastMap
    loss_history: list[LossBreakdown]
    lr_history: list[float]
    final_loss: LossBreakdown
    wall_time: float
    epochs_run: int
    param_count: int
    current_scale: float

    def __post_init__(self):
        if len(self.loss_history) != self.epochs_run:
            raise ValueError("loss history length must equal epochs_run")


def reconstruct(
    e_mea: FieldSet,
    setup: ImagingSetup,
    grid: Grid,
    cfg: TrainConfig,
    ops: GreenOperators | None = None,
) -> ReconstructionResult:
    """Full reconstruction from measured scattered fields.

    Builds the operators, computes the BP initialization, then optimizes
    the current-predicting network for cfg.max_epochs epochs and reads the
    permittivity from a final eval-mode pass.
    """
    if e_mea.kind != "scattered-receiver":
        raise ValueError("reconstruct expects scattered-receiver measurements")
    t0 = time.perf_counter()
    if cfg.strict_deterministic:
        torch.use_deterministic_algorithms(True)
        torch.set_num_threads(1)
    torch.manual_seed(cfg.seed)

    if ops is None:
        ops = build_operators(grid, setup)
    e_inc = incident_fields(setup, grid)

    j0 = bp_current(e_mea, ops)
    eps_bp = bp_permittivity(j0, e_inc, ops)

    dtype = cfg.torch_dtype
    x, scale = assemble_input(j0, eps_bp, dtype=dtype)
    t_ops = TorchOperators(ops, e_inc.values, e_mea.values, dtype=dtype)

    net = CurrentNet(grid.m, hidden=cfg.hidden, dropout_p=cfg.dropout_p).to(dtype)
    init_weights(net, cfg.seed)
    opt = torch.optim.Adam(
        net.parameters(),
        lr=cfg.lr0,
        betas=(cfg.adam_beta1, cfg.adam_beta2),
        eps=cfg.adam_eps,
    )

    history: list[LossBreakdown] = []
    lrs: list[float] = []
    net.train()
    for epoch in range(cfg.max_epochs):
        lr = lr_schedule(cfg, epoch)
        for group in opt.param_groups:
            group["lr"] = lr
        opt.zero_grad(set_to_none=True)
        try:
            j = output_currents(net(x), scale)
            loss, _, breakdown = total_loss(j, t_ops, cfg.alpha, cfg.beta0)
        except FloatingPointError as exc:
            raise FloatingPointError(f"epoch {epoch}: {exc}") from exc
        if not math.isfinite(breakdown.total):
            raise FloatingPointError(f"epoch {epoch}: non-finite loss {breakdown}")
        loss.backward()
        opt.step()
        history.append(breakdown)
        lrs.append(lr)
        if cfg.log_every and (epoch + 1) % cfg.log_every == 0:
            logger.info(
                "epoch %d/%d total=%.4e data=%.4e state=%.4e",
                epoch + 1, cfg.max_epochs, breakdown.total,
                breakdown.data, breakdown.state,
            )

    net.eval()
    with torch.no_grad():
        j = output_currents(net(x), scale)
        _, chi, final_loss = total_loss(j, t_ops, cfg.alpha, cfg.beta0)
    eps_pre = ContrastMap(
        chi=chi.numpy().astype(np.complex128), grid=grid
    )
    return ReconstructionResult(
        eps_r_pre=eps_pre,
        eps_r_bp=eps_bp,
        loss_history=history,
        lr_history=lrs,
        final_loss=final_loss,
        wall_time=time.perf_counter() - t0,
        epochs_run=cfg.max_epochs,
        param_count=parameter_count(net),
        current_scale=scale,
    )
