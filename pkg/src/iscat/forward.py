"""Forward problem: total-field solve, scattered-field synthesis, noise.

The state equation (I - G_D diag(chi)) E_tot = E_inc is solved per
illumination with BiCGSTAB using the FFT-accelerated operator application.
Transmitters are unit-amplitude line sources, consistent with the
finite-radius measurement ring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, bicgstab

from .operators import GreenOperators, apply_gd, green2d
from .scene import ContrastMap, Grid, ImagingSetup

FIELD_KINDS = ("incident-domain", "total-domain", "scattered-receiver")


@dataclass(frozen=True)
class FieldSet:
    """Per-illumination complex field arrays [V/m].

    Domain kinds have shape (n_illum, m, m); scattered-receiver has shape
    (n_illum, n_rx).
    """

    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.complex128)
        expected_ndim = 2 if self.kind == "scattered-receiver" else 3
        if v.ndim != expected_ndim:
            raise ValueError(
                f"{self.kind} fields must be {expected_ndim}-D, got shape {v.shape}"
            )
        object.__setattr__(self, "values", v)
        self.values.setflags(write=False)

    @property
    def n_illum(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CurrentSet:
    """Induced contrast currents, shape (n_illum, m, m)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 3 or v.shape[1] != v.shape[2]:
            raise ValueError(f"currents must have shape (n, m, m), got {v.shape}")
        object.__setattr__(self, "values", v)
        self.values.setflags(write=False)

    @property
    def n_illum(self) -> int:
        return self.values.shape[0]


class SolverError(RuntimeError):
    """Krylov non-convergence; carries the residual history."""

    def __init__(self, msg: str, residuals: list[float]):
        super().__init__(msg)
        self.residuals = residuals


def incident_fields(setup: ImagingSetup, grid: Grid) -> FieldSet:
    """Unit-amplitude line-source incident fields over the grid.

    E_inc for transmitter t at cell q is (i/4) H0^(1)(k0 |r_q - r_t|).
    """
    x, y = grid.centers()
    tx = setup.tx_positions
    dist = np.hypot(
        x[None, :, :] - tx[:, 0, None, None], y[None, :, :] - tx[:, 1, None, None]
    )
    return FieldSet(values=green2d(setup.k0, dist), kind="incident-domain")


def incident_at_points(setup: ImagingSetup, points: np.ndarray) -> np.ndarray:
    """Line-source incident field at arbitrary points, shape (n_tx, n_pts)."""
    tx = setup.tx_positions
    dist = np.hypot(
        points[None, :, 0] - tx[:, 0, None], points[None, :, 1] - tx[:, 1, None]
    )
    return green2d(setup.k0, dist)


def solve_total_field(
    chi: ContrastMap,
    e_inc: FieldSet,
    ops: GreenOperators,
    tol: float = 1e-6,
    max_iter: int = 2000,
) -> tuple[FieldSet, CurrentSet]:
    """Solve (I - G_D diag(chi)) E_tot = E_inc per illumination.

    Returns the total fields and the induced currents J = chi * E_tot.
    Relative residual <= tol is re-verified post hoc; non-convergence raises
    SolverError with the residual history of the failing illumination.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if e_inc.kind != "incident-domain":
        raise ValueError("e_inc must be an incident-domain FieldSet")
    m = ops.m
    chi_flat = chi.chi.ravel()

    def matvec(v):
        e = v.reshape(m, m)
        return (e - apply_gd(ops, chi_flat.reshape(m, m) * e)).ravel()

    a_op = LinearOperator(
        (m * m, m * m), matvec=matvec, dtype=np.complex128
    )
    totals = np.empty_like(e_inc.values)
    for p in range(e_inc.n_illum):
        b = e_inc.values[p].ravel()
        bnorm = np.linalg.norm(b)
        residuals: list[float] = []

        def track(xk):
            residuals.append(float(np.linalg.norm(b - a_op @ xk) / bnorm))

        sol, info = bicgstab(
            a_op, b, x0=b.copy(), rtol=tol, atol=0.0, maxiter=max_iter,
            callback=track,
        )
        rel = float(np.linalg.norm(b - a_op @ sol) / bnorm)
        if info != 0 or rel > tol:
            raise SolverError(
                f"total-field solve for illumination {p} did not reach "
                f"tol={tol:g} within {max_iter} iterations (residual {rel:.3e})",
                residuals,
            )
        totals[p] = sol.reshape(m, m)
    e_tot = FieldSet(values=totals, kind="total-domain")
    j = CurrentSet(values=chi.chi[None, :, :] * totals)
    return e_tot, j


def scattered_fields(j: CurrentSet, ops: GreenOperators) -> FieldSet:
    """Radiate currents to the receivers: E_sca = G_S vec(J)."""
    m = ops.m
    if j.values.shape[1:] != (m, m):
        raise ValueError(
            f"current shape {j.values.shape} does not match grid m={m}"
        )
    es = j.values.reshape(j.n_illum, m * m) @ ops.gs.T
    return FieldSet(values=es, kind="scattered-receiver")


def add_awgn(e_sca: FieldSet, snr_db: float, seed: int) -> FieldSet:
    """Add complex circular Gaussian noise at the requested dataset SNR.

    Per-sample noise variance is ||E||^2 / (K * 10^(snr_db/10)) with K the
    total sample count. Deterministic for a fixed seed.
    """
    if e_sca.kind != "scattered-receiver":
        raise ValueError("noise injection applies to scattered-receiver fields")
    v = e_sca.values
    k = v.size
    var = np.sum(np.abs(v) ** 2) / (k * 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = np.sqrt(var / 2.0) * (
        rng.standard_normal(v.shape) + 1j * rng.standard_normal(v.shape)
    )
    return FieldSet(values=v + noise, kind="scattered-receiver")
