"""Imaging geometry and synthetic scene rasterization.

Coordinate convention: x to the right, y up, row index i increasing with y.
The DOI (domain of interest) is a square of side ``side_len`` centered at
the origin; cell (i, j) has its center at
``(-side_len/2 + (j+0.5)*h, -side_len/2 + (i+0.5)*h)`` with ``h`` the cell
size. All types are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .constants import (
    BUILTIN_PROFILES,
    C0,
    DEFAULT_DOI_M,
    DEFAULT_FREQ_HZ,
    DEFAULT_GRID_M,
    DEFAULT_N_RX,
    DEFAULT_N_TX,
    DEFAULT_RING_RADIUS_FACTOR,
)


class GeometryError(ValueError):
    """Raised for invalid grid, setup, or shape geometry."""


@dataclass(frozen=True)
class Grid:
    """Uniform square discretization of the DOI.

    Parameters
    ----------
    m : int
        Number of cells per side (>= 2).
    side_len : float
        DOI side length [m].
    """

    m: int
    side_len: float

    def __post_init__(self):
        if self.m < 2:
            raise GeometryError(f"grid must have m >= 2 cells per side, got {self.m}")
        if self.side_len <= 0:
            raise GeometryError("side_len must be positive")

    @property
    def cell_size(self) -> float:
        return self.side_len / self.m

    @property
    def cell_area(self) -> float:
        return self.cell_size ** 2

    @property
    def axis(self) -> np.ndarray:
        """Cell-center coordinates along one axis, ascending."""
        h = self.cell_size
        return -0.5 * self.side_len + (np.arange(self.m) + 0.5) * h

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, Y) arrays of cell-center coordinates, shape (m, m)."""
        a = self.axis
        return np.meshgrid(a, a)  # X varies with column j, Y with row i

    @property
    def n_cells(self) -> int:
        return self.m * self.m


@dataclass(frozen=True)
class ImagingSetup:
    """Transmitter/receiver ring geometry and operating frequency."""

    freq: float
    n_tx: int = DEFAULT_N_TX
    n_rx: int = DEFAULT_N_RX
    ring_radius: float = 0.0  # 0 means "20 wavelengths", filled in below

    def __post_init__(self):
        if self.freq <= 0:
            raise GeometryError("frequency must be positive")
        if self.n_tx < 1 or self.n_rx < 1:
            raise GeometryError("need at least one transmitter and one receiver")
        if self.ring_radius == 0.0:
            object.__setattr__(
                self, "ring_radius", DEFAULT_RING_RADIUS_FACTOR * self.lambda0
            )
        if self.ring_radius <= 0:
            raise GeometryError("ring_radius must be positive")

    @property
    def k0(self) -> float:
        return 2.0 * math.pi * self.freq / C0

    @property
    def lambda0(self) -> float:
        return C0 / self.freq

    def _ring(self, n: int) -> np.ndarray:
        ang = 2.0 * math.pi * np.arange(n) / n
        return self.ring_radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)

    @property
    def tx_positions(self) -> np.ndarray:
        """Transmitter coordinates, shape (n_tx, 2)."""
        return self._ring(self.n_tx)

    @property
    def rx_positions(self) -> np.ndarray:
        """Receiver coordinates, shape (n_rx, 2)."""
        return self._ring(self.n_rx)


def default_setup(freq: float = DEFAULT_FREQ_HZ) -> ImagingSetup:
    return ImagingSetup(freq=freq)


def default_grid(m: int = DEFAULT_GRID_M) -> Grid:
    return Grid(m=m, side_len=DEFAULT_DOI_M)


@dataclass(frozen=True)
class ShapeSpec:
    """A single homogeneous scatterer shape.

    ``kind`` is one of {"disc", "annulus", "rectangle"}. ``params`` holds the
    kind-specific dimensions: disc {radius}, annulus {r_inner, r_outer},
    rectangle {half_w, half_h}. ``eps_r`` is the complex relative
    permittivity of the shape.
    """

    kind: str
    center: tuple[float, float]
    params: dict
    eps_r: complex

    def __post_init__(self):
        if self.kind == "disc":
            if self.params.get("radius", 0.0) <= 0:
                raise GeometryError("disc radius must be positive")
        elif self.kind == "annulus":
            ri, ro = self.params.get("r_inner", 0.0), self.params.get("r_outer", 0.0)
            if ri <= 0 or ro <= 0 or ri >= ro:
                raise GeometryError("annulus requires 0 < r_inner < r_outer")
        elif self.kind == "rectangle":
            if self.params.get("half_w", 0.0) <= 0 or self.params.get("half_h", 0.0) <= 0:
                raise GeometryError("rectangle half-extents must be positive")
        else:
            raise GeometryError(f"unknown shape kind {self.kind!r}")
        if complex(self.eps_r).real < 1.0:
            raise GeometryError("ground-truth shapes require Re(eps_r) >= 1")

    @classmethod
    def disc(cls, center, radius, eps_r) -> "ShapeSpec":
        return cls("disc", tuple(center), {"radius": float(radius)}, complex(eps_r))

    @classmethod
    def annulus(cls, center, r_inner, r_outer, eps_r) -> "ShapeSpec":
        return cls(
            "annulus",
            tuple(center),
            {"r_inner": float(r_inner), "r_outer": float(r_outer)},
            complex(eps_r),
        )

    @classmethod
    def rectangle(cls, center, half_w, half_h, eps_r) -> "ShapeSpec":
        return cls(
            "rectangle",
            tuple(center),
            {"half_w": float(half_w), "half_h": float(half_h)},
            complex(eps_r),
        )

    def bounding_half_extent(self) -> tuple[float, float]:
        """Half-width/half-height of the axis-aligned bounding box."""
        if self.kind == "disc":
            r = self.params["radius"]
            return r, r
        if self.kind == "annulus":
            r = self.params["r_outer"]
            return r, r
        return self.params["half_w"], self.params["half_h"]

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Boolean membership mask for points (x, y); cell-center test."""
        dx = x - self.center[0]
        dy = y - self.center[1]
        if self.kind == "disc":
            return dx * dx + dy * dy < self.params["radius"] ** 2
        if self.kind == "annulus":
            r2 = dx * dx + dy * dy
            return (r2 < self.params["r_outer"] ** 2) & (
                r2 >= self.params["r_inner"] ** 2
            )
        return (np.abs(dx) < self.params["half_w"]) & (
            np.abs(dy) < self.params["half_h"]
        )


@dataclass(frozen=True)
class ContrastMap:
    """Per-cell complex contrast chi = eps_r - 1 over a grid."""

    chi: np.ndarray
    grid: Grid

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=np.complex128)
        if chi.shape != (self.grid.m, self.grid.m):
            raise GeometryError(
                f"contrast shape {chi.shape} does not match grid m={self.grid.m}"
            )
        object.__setattr__(self, "chi", chi)
        self.chi.setflags(write=False)

    @property
    def eps_r(self) -> np.ndarray:
        return 1.0 + self.chi


def rasterize_scene(shapes: Iterable[ShapeSpec], grid: Grid) -> ContrastMap:
    """Rasterize shapes into a contrast map by cell-center membership.

    Later shapes overwrite earlier ones where they overlap. A shape whose
    bounding box extends outside the DOI is rejected.
    """
    half = grid.side_len / 2.0
    eps = np.ones((grid.m, grid.m), dtype=np.complex128)
    x, y = grid.centers()
    for s in shapes:
        bw, bh = s.bounding_half_extent()
        cx, cy = s.center
        if abs(cx) + bw > half or abs(cy) + bh > half:
            raise GeometryError(
                f"shape {s.kind} at {s.center} extends outside the DOI "
                f"(half-side {half:g} m)"
            )
        mask = s.contains(x, y)
        eps[mask] = s.eps_r
    return ContrastMap(chi=eps - 1.0, grid=grid)


def builtin_profile(name: str) -> list[ShapeSpec]:
    """Return the shape list of a builtin test case.

    Valid names: austria, overlap-ring, three-discs, overlap-disc,
    concentric, corner-overlap.
    """
    try:
        entries = BUILTIN_PROFILES[name]
    except KeyError:
        valid = ", ".join(sorted(BUILTIN_PROFILES))
        raise GeometryError(f"unknown profile {name!r}; valid names: {valid}") from None
    shapes = []
    for kind, center, params, eps_r in entries:
        shapes.append(ShapeSpec(kind, tuple(center), dict(params), complex(eps_r)))
    return shapes
