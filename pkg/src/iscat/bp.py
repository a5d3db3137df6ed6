"""Backpropagation (BP) initial estimates of current and permittivity.

One adjoint step per illumination with an optimal scalar step length; the
resulting current and permittivity form the network input. "BP" here is
the classical inverse-scattering initializer, not gradient backpropagation.
"""

from __future__ import annotations

import logging

import numpy as np

from .forward import CurrentSet, FieldSet
from .operators import GreenOperators, apply_gd
from .scene import ContrastMap

logger = logging.getLogger(__name__)

DEGENERATE_DENOM = 1e-30


def bp_current(e_mea: FieldSet, ops: GreenOperators) -> CurrentSet:
    """Adjoint-based initial current J_p = gamma_p * G_S^H E_mea,p.

    gamma_p is the least-squares optimal scalar along the adjoint
    direction: gamma_p = <G_S G_S^H E, E> / ||G_S G_S^H E||^2. Illuminations
    with zero measured field get J = 0 (logged).
    """
    if e_mea.kind != "scattered-receiver":
        raise ValueError("bp_current expects scattered-receiver measurements")
    m = ops.m
    gs = ops.gs
    out = np.zeros((e_mea.n_illum, m, m), dtype=np.complex128)
    n_zero = 0
    for p in range(e_mea.n_illum):
        e = e_mea.values[p]
        adj = gs.conj().T @ e
        w = gs @ adj
        wnorm2 = np.vdot(w, w).real
        if wnorm2 <= DEGENERATE_DENOM:
            n_zero += 1
            continue
        gamma = np.vdot(w, e) / wnorm2
        out[p] = (gamma * adj).reshape(m, m)
    if n_zero:
        logger.warning(
            "bp_current: %d illumination(s) had zero measured field; J set to 0",
            n_zero,
        )
    return CurrentSet(values=out)


def pixel_contrast(
    j: np.ndarray, e_tot: np.ndarray
) -> tuple[np.ndarray, int]:
    """Per-pixel least-squares contrast from currents and total fields.

    chi = sum_p conj(E_p) * J_p / sum_p |E_p|^2 pixel-wise; pixels with a
    degenerate denominator get chi = 0. Returns (chi, degenerate_count).
    """
    num = np.sum(np.conj(e_tot) * j, axis=0)
    den = np.sum(np.abs(e_tot) ** 2, axis=0)
    bad = den < DEGENERATE_DENOM
    chi = np.where(bad, 0.0, num / np.where(bad, 1.0, den))
    return chi, int(bad.sum())


def bp_permittivity(
    j0: CurrentSet, e_inc: FieldSet, ops: GreenOperators
) -> ContrastMap:
    """Permittivity estimate from a current set via the least-squares ratio.

    E_tot = E_inc + G_D J per illumination, then the per-pixel contrast
    ratio; eps_r = 1 + chi.
    """
    if e_inc.kind != "incident-domain":
        raise ValueError("bp_permittivity expects incident-domain fields")
    if j0.values.shape != e_inc.values.shape:
        raise ValueError("current and incident field shapes must match")
    e_tot = e_inc.values + apply_gd(ops, j0.values)
    chi, n_bad = pixel_contrast(j0.values, e_tot)
    if n_bad:
        logger.warning("bp_permittivity: %d degenerate pixel(s) set to chi=0", n_bad)
    return ContrastMap(chi=chi, grid=ops.grid)
