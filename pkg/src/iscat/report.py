"""Evaluation metrics, map rendering, and benchmark tables."""

from __future__ import annotations

import platform
import time
from pathlib import Path

import numpy as np
from matplotlib import colormaps
from PIL import Image

from .constants import REFERENCE_TIMINGS_S
from .scene import ContrastMap, GeometryError


def metric_rrmse(eps_pre: ContrastMap, eps_true: ContrastMap) -> float:
    """Relative L2 error of the permittivity map over all cells."""
    if eps_pre.grid != eps_true.grid:
        raise GeometryError("permittivity maps live on different grids")
    diff = eps_pre.eps_r - eps_true.eps_r
    return float(np.linalg.norm(diff) / np.linalg.norm(eps_true.eps_r))


def support_mean(eps: ContrastMap, truth: ContrastMap) -> complex:
    """Mean eps_r over the true scatterer support (chi != 0 cells)."""
    mask = truth.chi != 0
    if not mask.any():
        return complex(np.mean(eps.eps_r))
    return complex(np.mean(eps.eps_r[mask]))


def colormap_lut(values: np.ndarray, vmin: float, vmax: float,
                 cmap: str = "viridis") -> np.ndarray:
    """Linear colormap lookup to uint8 RGB, clipping outside [vmin, vmax]."""
    if vmax <= vmin:
        raise ValueError("require vmax > vmin")
    t = np.clip((values - vmin) / (vmax - vmin), 0.0, 1.0)
    rgba = colormaps[cmap](t)
    return (rgba[..., :3] * 255.0 + 0.5).astype(np.uint8)


def render_map(
    eps: ContrastMap,
    vrange: tuple[float, float],
    path,
    part: str = "real",
    cmap: str = "viridis",
    upscale: int = 4,
) -> Path:
    """Render Re or Im of eps_r to a PNG with a fixed linear colormap.

    Row 0 of the map is the bottom of the image (y up). Deterministic: the
    same input always produces byte-identical files.
    """
    v = eps.eps_r.real if part == "real" else eps.eps_r.imag
    if not np.isfinite(v).all():
        raise ValueError("cannot render non-finite permittivity values")
    rgb = colormap_lut(v[::-1, :], *vrange, cmap=cmap)
    if upscale > 1:
        rgb = np.repeat(np.repeat(rgb, upscale, axis=0), upscale, axis=1)
    img = Image.fromarray(rgb, mode="RGB")
    path = Path(path)
    img.save(path, format="PNG")
    return path


def hardware_descriptor() -> str:
    u = platform.uname()
    return f"{u.system} {u.machine} {u.processor or 'unknown-cpu'}".strip()


def benchmark(case_results: dict[str, dict]) -> list[dict]:
    """Assemble a timing table from per-case measurements.

    ``case_results`` maps case name to {"setup_s", "epoch_mean_s",
    "total_s"}. Adds the published per-case reference times where known; no
    pass/fail on absolute time.
    """
    rows = []
    hw = hardware_descriptor()
    for name, meas in case_results.items():
        rows.append(
            {
                "case": name,
                "setup_s": meas["setup_s"],
                "epoch_mean_s": meas["epoch_mean_s"],
                "total_s": meas["total_s"],
                "reference_s": REFERENCE_TIMINGS_S.get(name, ""),
                "hardware": hw,
            }
        )
    return rows


def write_benchmark_csv(path, rows: list[dict]) -> None:
    cols = ["case", "setup_s", "epoch_mean_s", "total_s", "reference_s", "hardware"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(str(row[c]) for c in cols) + "\n")


class Stopwatch:
    """Minimal wall-clock accumulator for benchmark sections."""

    def __init__(self):
        self.t0 = time.perf_counter()

    def lap(self) -> float:
        now = time.perf_counter()
        dt = now - self.t0
        self.t0 = now
        return dt
