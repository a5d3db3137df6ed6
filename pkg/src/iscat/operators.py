"""Discretized Green's operators for the 2-D TM volume integral equation.

Pixel basis with point matching: the domain operator ``G_D`` maps a current
map to the field it radiates inside the DOI, the data operator ``G_S`` maps
it to the field at the receivers. ``G_D`` depends only on cell-center
offsets, so it is stored as a (2m-1, 2m-1) translation kernel and applied
with zero-padded FFT convolution; its diagonal (self-cell) term uses the
equal-area circular-cell closed form.

Time convention e^{-i omega t}, so the outgoing Green's function is
g(k, d) = (i/4) H0^(1)(k d) and lossy media have Im(eps_r) >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import hankel1

from .scene import GeometryError, Grid, ImagingSetup


def green2d(k0: float, dist) -> np.ndarray:
    """Scalar 2-D outgoing Green's function (i/4) H0^(1)(k0*dist).

    ``dist`` may be a scalar or array of strictly positive distances [m].
    """
    d = np.asarray(dist, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("green2d requires dist > 0; the self term is separate")
    return 0.25j * hankel1(0, k0 * d)


def self_term(k0: float, cell_size: float) -> complex:
    """Diagonal entry of G_D: integral of k0^2*g over an equal-area disc.

    The square cell is replaced by a disc of equal area (radius
    a = h/sqrt(pi)); the integral then has the closed form
    (i/2) * pi * k0 * a * H1^(1)(k0 a) - 1.
    """
    a = cell_size / math.sqrt(math.pi)
    return complex(0.5j * math.pi * k0 * a * hankel1(1, k0 * a) - 1.0)


@dataclass(frozen=True)
class GreenOperators:
    """Immutable bundle of the discretized operators for one geometry.

    gs        : (n_rx, m*m) dense domain-to-receiver matrix.
    gd_kernel : (2m-1, 2m-1) off-diagonal translation kernel of G_D,
                indexed by (di + m - 1, dj + m - 1); center entry is 0.
    self_term : complex diagonal of G_D.
    kernel_fft: FFT of gd_kernel zero-padded to (pad, pad), pad a power of
                two >= 2m-1; precomputed once, shared read-only.
    """

    grid: Grid
    k0: float
    gs: np.ndarray
    gd_kernel: np.ndarray
    self_term: complex
    kernel_fft: np.ndarray
    pad: int

    @property
    def m(self) -> int:
        return self.grid.m

    @property
    def n_rx(self) -> int:
        return self.gs.shape[0]


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def build_gd(grid: Grid, k0: float) -> tuple[np.ndarray, complex, np.ndarray, int]:
    """Build the G_D translation kernel, self term and padded kernel FFT."""
    m = grid.m
    h = grid.cell_size
    off = np.arange(-(m - 1), m)
    di, dj = np.meshgrid(off, off, indexing="ij")
    dist = h * np.hypot(di, dj)
    kernel = np.zeros((2 * m - 1, 2 * m - 1), dtype=np.complex128)
    mask = dist > 0
    kernel[mask] = k0 ** 2 * grid.cell_area * green2d(k0, dist[mask])
    st = self_term(k0, h)

    pad = _next_pow2(2 * m - 1)
    kpad = np.zeros((pad, pad), dtype=np.complex128)
    kpad[: 2 * m - 1, : 2 * m - 1] = kernel
    kfft = np.fft.fft2(kpad)
    kfft.setflags(write=False)
    kernel.setflags(write=False)
    return kernel, st, kfft, pad


def build_gs(grid: Grid, setup: ImagingSetup) -> np.ndarray:
    """Build the dense (n_rx, m*m) domain-to-receiver matrix."""
    half = grid.side_len / 2.0
    rx = setup.rx_positions
    inside = (np.abs(rx[:, 0]) <= half) & (np.abs(rx[:, 1]) <= half)
    if np.any(inside):
        raise GeometryError("all receivers must lie strictly outside the DOI")
    x, y = grid.centers()
    dx = rx[:, 0, None] - x.ravel()[None, :]
    dy = rx[:, 1, None] - y.ravel()[None, :]
    dist = np.hypot(dx, dy)
    return k0sq_area(grid, setup.k0) * green2d(setup.k0, dist)


def k0sq_area(grid: Grid, k0: float) -> float:
    return k0 ** 2 * grid.cell_area


def build_operators(grid: Grid, setup: ImagingSetup) -> GreenOperators:
    """Assemble G_S and the FFT-ready G_D representation for a geometry."""
    kernel, st, kfft, pad = build_gd(grid, setup.k0)
    gs = build_gs(grid, setup)
    gs.setflags(write=False)
    return GreenOperators(
        grid=grid,
        k0=setup.k0,
        gs=gs,
        gd_kernel=kernel,
        self_term=st,
        kernel_fft=kfft,
        pad=pad,
    )


def apply_gd(ops: GreenOperators, x: np.ndarray) -> np.ndarray:
    """Apply G_D to one or more (m, m) maps via FFT convolution.

    Accepts shape (m, m) or (n, m, m); pure and reentrant. Equals the dense
    matrix-vector product with the element-wise assembled G_D.
    """
    m = ops.m
    single = x.ndim == 2
    xs = x[None] if single else x
    if xs.shape[-2:] != (m, m):
        raise ValueError(f"input shape {x.shape} does not match grid m={m}")
    pad = ops.pad
    xpad = np.zeros(xs.shape[:-2] + (pad, pad), dtype=np.complex128)
    xpad[..., :m, :m] = xs
    conv = np.fft.ifft2(np.fft.fft2(xpad) * ops.kernel_fft)
    y = conv[..., m - 1 : 2 * m - 1, m - 1 : 2 * m - 1] + ops.self_term * xs
    return y[0] if single else y


def dense_gd(ops: GreenOperators) -> np.ndarray:
    """Assemble the dense (m^2, m^2) G_D matrix from the kernel.

    Intended for small grids in tests and audits; O(m^4) memory.
    """
    m = ops.m
    idx = np.arange(m)
    i, j = np.meshgrid(idx, idx, indexing="ij")
    rows_i = i.ravel()
    rows_j = j.ravel()
    di = rows_i[:, None] - rows_i[None, :]
    dj = rows_j[:, None] - rows_j[None, :]
    g = ops.gd_kernel[di + m - 1, dj + m - 1].astype(np.complex128)
    g[np.arange(m * m), np.arange(m * m)] = ops.self_term
    return g
