"""File formats: scene JSON, field CSV/binary, result dirs, Fresnel data.

All numeric payloads round-trip at full float64 precision (CSV via 17
significant digits, binary via little-endian interleaved re/im float64).
Scene documents carry a "schema" version field; only version 1 is read.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .forward import FieldSet
from .operators import GreenOperators, green2d
from .scene import ContrastMap, Grid, ImagingSetup, ShapeSpec
from .train import ReconstructionResult, TrainConfig

SCHEMA_VERSION = 1
FIELDS_MAGIC = b"ISCATFLD"
OPS_MAGIC = b"ISCATOPS"


class DataFormatError(ValueError):
    """Malformed or unsupported input file."""


# ---------------------------------------------------------------------------
# Scene JSON
# ---------------------------------------------------------------------------
def _shape_to_json(s: ShapeSpec) -> dict:
    d = {"kind": s.kind, "center": list(s.center), **s.params}
    d["eps_r"] = [s.eps_r.real, s.eps_r.imag]
    return d


def _shape_from_json(d: dict, where: str) -> ShapeSpec:
    try:
        kind = d["kind"]
        center = tuple(d["center"])
        eps = complex(d["eps_r"][0], d["eps_r"][1])
        params = {
            k: float(v)
            for k, v in d.items()
            if k not in ("kind", "center", "eps_r")
        }
        return ShapeSpec(kind, center, params, eps)
    except (KeyError, TypeError, IndexError) as exc:
        raise DataFormatError(f"bad shape entry in {where}: {exc}") from exc


def save_scene(
    path, shapes: list[ShapeSpec], grid: Grid, setup: ImagingSetup
) -> None:
    doc = {
        "schema": SCHEMA_VERSION,
        "grid": {"m": grid.m, "side_len": grid.side_len},
        "setup": {
            "freq": setup.freq,
            "n_tx": setup.n_tx,
            "n_rx": setup.n_rx,
            "ring_radius": setup.ring_radius,
        },
        "shapes": [_shape_to_json(s) for s in shapes],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_scene(path) -> tuple[list[ShapeSpec], Grid, ImagingSetup]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    version = doc.get("schema")
    if version != SCHEMA_VERSION:
        raise DataFormatError(
            f"{path}: unsupported scene schema version {version!r} "
            f"(supported: {SCHEMA_VERSION})"
        )
    try:
        grid = Grid(m=int(doc["grid"]["m"]), side_len=float(doc["grid"]["side_len"]))
        s = doc["setup"]
        setup = ImagingSetup(
            freq=float(s["freq"]),
            n_tx=int(s["n_tx"]),
            n_rx=int(s["n_rx"]),
            ring_radius=float(s["ring_radius"]),
        )
    except KeyError as exc:
        raise DataFormatError(f"{path}: missing field {exc}") from exc
    shapes = [
        _shape_from_json(d, f"{path} shapes[{i}]")
        for i, d in enumerate(doc.get("shapes", []))
    ]
    return shapes, grid, setup


# ---------------------------------------------------------------------------
# Scattered-field CSV and binary twin
# ---------------------------------------------------------------------------
def save_fields_csv(path, fields: FieldSet) -> None:
    if fields.kind != "scattered-receiver":
        raise ValueError("field CSV holds scattered-receiver data")
    v = fields.values
    with open(path, "w") as fh:
        fh.write("tx,rx,re,im\n")
        for t in range(v.shape[0]):
            for r in range(v.shape[1]):
                fh.write(f"{t},{r},{v[t, r].real:.17g},{v[t, r].imag:.17g}\n")


def load_fields_csv(path) -> FieldSet:
    entries = {}
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        for name in ("tx", "rx", "re", "im"):
            if name not in cols:
                raise DataFormatError(f"{path}: missing column {name!r} in header")
        idx = {name: cols.index(name) for name in ("tx", "rx", "re", "im")}
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(cols):
                raise DataFormatError(
                    f"{path}:{lineno}: expected {len(cols)} fields, got {len(parts)}"
                )
            try:
                t = int(parts[idx["tx"]])
                r = int(parts[idx["rx"]])
                val = complex(float(parts[idx["re"]]), float(parts[idx["im"]]))
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            entries[(t, r)] = val
    if not entries:
        raise DataFormatError(f"{path}: no data rows")
    n_tx = max(t for t, _ in entries) + 1
    n_rx = max(r for _, r in entries) + 1
    if len(entries) != n_tx * n_rx:
        raise DataFormatError(
            f"{path}: incomplete (tx, rx) grid: {len(entries)} rows for "
            f"{n_tx} x {n_rx} samples"
        )
    v = np.empty((n_tx, n_rx), dtype=np.complex128)
    for (t, r), val in entries.items():
        v[t, r] = val
    return FieldSet(values=v, kind="scattered-receiver")


def _interleave(a: np.ndarray) -> bytes:
    out = np.empty(a.size * 2, dtype="<f8")
    out[0::2] = a.real.ravel()
    out[1::2] = a.imag.ravel()
    return out.tobytes()


def _deinterleave(buf: bytes, shape) -> np.ndarray:
    flat = np.frombuffer(buf, dtype="<f8")
    return (flat[0::2] + 1j * flat[1::2]).reshape(shape)


def save_fields_bin(path, fields: FieldSet) -> None:
    """Binary twin of the field CSV: 32-byte header, interleaved float64."""
    if fields.kind != "scattered-receiver":
        raise ValueError("binary field dump holds scattered-receiver data")
    v = fields.values
    header = struct.pack("<8sII8x8x", FIELDS_MAGIC, v.shape[0], v.shape[1])
    Path(path).write_bytes(header + _interleave(v))


def load_fields_bin(path) -> FieldSet:
    raw = Path(path).read_bytes()
    if len(raw) < 32 or raw[:8] != FIELDS_MAGIC:
        raise DataFormatError(f"{path}: not a field dump (bad magic)")
    n_tx, n_rx = struct.unpack("<II", raw[8:16])
    expected = 32 + n_tx * n_rx * 16
    if len(raw) != expected:
        raise DataFormatError(f"{path}: expected {expected} bytes, got {len(raw)}")
    return FieldSet(
        values=_deinterleave(raw[32:], (n_tx, n_rx)), kind="scattered-receiver"
    )


def dump_operators(path, ops: GreenOperators) -> None:
    """Fixture dump of G_S and the G_D kernel (32-byte header + float64)."""
    header = struct.pack("<8sIId8x", OPS_MAGIC, ops.m, ops.n_rx, ops.k0)
    body = (
        _interleave(ops.gs)
        + _interleave(ops.gd_kernel)
        + _interleave(np.array([ops.self_term]))
    )
    Path(path).write_bytes(header + body)


def load_operator_arrays(path) -> dict:
    """Read back an operator dump; returns raw arrays, not a GreenOperators."""
    raw = Path(path).read_bytes()
    if len(raw) < 32 or raw[:8] != OPS_MAGIC:
        raise DataFormatError(f"{path}: not an operator dump (bad magic)")
    m, n_rx, k0 = struct.unpack("<IId", raw[8:24])
    off = 32
    gs_n = n_rx * m * m * 16
    gs = _deinterleave(raw[off : off + gs_n], (n_rx, m * m))
    off += gs_n
    kn = (2 * m - 1) ** 2 * 16
    kernel = _deinterleave(raw[off : off + kn], (2 * m - 1, 2 * m - 1))
    off += kn
    st = _deinterleave(raw[off : off + 16], (1,))[0]
    return {"m": m, "n_rx": n_rx, "k0": k0, "gs": gs, "gd_kernel": kernel,
            "self_term": st}


# ---------------------------------------------------------------------------
# Permittivity maps and result directories
# ---------------------------------------------------------------------------
def save_eps_csv(path, eps: ContrastMap) -> None:
    v = eps.eps_r
    with open(path, "w") as fh:
        fh.write("i,j,re,im\n")
        for i in range(v.shape[0]):
            for j in range(v.shape[1]):
                fh.write(f"{i},{j},{v[i, j].real:.17g},{v[i, j].imag:.17g}\n")


def load_eps_csv(path, grid: Grid) -> ContrastMap:
    eps = np.empty((grid.m, grid.m), dtype=np.complex128)
    seen = 0
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "i,j,re,im":
            raise DataFormatError(f"{path}: expected header 'i,j,re,im'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                i_s, j_s, re_s, im_s = line.split(",")
                eps[int(i_s), int(j_s)] = complex(float(re_s), float(im_s))
            except (ValueError, IndexError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            seen += 1
    if seen != grid.n_cells:
        raise DataFormatError(
            f"{path}: {seen} cells read, grid needs {grid.n_cells}"
        )
    return ContrastMap(chi=eps - 1.0, grid=grid)


def save_result(out_dir, result: ReconstructionResult, cfg: TrainConfig,
                extra_meta: dict | None = None) -> None:
    """Write eps_r.csv, loss_history.csv and run_meta.json to out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_eps_csv(out / "eps_r.csv", result.eps_r_pre)
    with open(out / "loss_history.csv", "w") as fh:
        fh.write("epoch,state,data,bound,tv,total,lr\n")
        for i, (b, lr) in enumerate(zip(result.loss_history, result.lr_history)):
            fh.write(
                f"{i},{b.state:.17g},{b.data:.17g},{b.bound:.17g},"
                f"{b.tv:.17g},{b.total:.17g},{lr:.17g}\n"
            )
    meta = {
        "config": asdict(cfg),
        "final_loss": asdict(result.final_loss),
        "wall_time_s": result.wall_time,
        "epochs_run": result.epochs_run,
        "param_count": result.param_count,
        "current_scale": result.current_scale,
    }
    if extra_meta:
        meta.update(extra_meta)
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Fresnel Institute experimental data
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FresnelRecord:
    """One measured sample: angles in degrees, fields as complex values."""

    tx_angle: float
    rx_angle: float
    freq: float
    total_field: complex
    incident_field: complex

    def __post_init__(self):
        if not (0.0 <= self.tx_angle < 360.0 and 0.0 <= self.rx_angle < 360.0):
            raise DataFormatError("angles must lie in [0, 360)")
        if self.freq <= 0:
            raise DataFormatError("frequency must be positive")


def parse_fresnel(path) -> list[FresnelRecord]:
    """Parse a whitespace-separated Fresnel measurement file.

    Expected columns per record line:
    tx_angle_deg rx_angle_deg freq_ghz re_total im_total re_incident
    im_incident. Lines starting with '#' or containing non-numeric tokens
    in the first column are treated as comments/headers and skipped.
    """
    records: list[FresnelRecord] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith(("#", "%", "//")):
                continue
            parts = line.split()
            try:
                float(parts[0])
            except ValueError:
                continue  # textual header line
            if len(parts) != 7:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 7 columns, got {len(parts)}"
                )
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
            records.append(
                FresnelRecord(
                    tx_angle=vals[0] % 360.0,
                    rx_angle=vals[1] % 360.0,
                    freq=vals[2] * 1e9,
                    total_field=complex(vals[3], vals[4]),
                    incident_field=complex(vals[5], vals[6]),
                )
            )
    return records


def select_frequency(
    records: list[FresnelRecord], freq: float, rtol: float = 1e-6
) -> list[FresnelRecord]:
    return [r for r in records if abs(r.freq - freq) <= rtol * freq]


def records_grid(
    records: list[FresnelRecord],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Arrange single-frequency records on a (tx, rx) angle grid.

    Returns (tx_angles, rx_angles, total, incident); raises if any (tx, rx)
    pair is missing or duplicated.
    """
    if not records:
        raise DataFormatError("no records to arrange")
    tx_angles = np.array(sorted({r.tx_angle for r in records}))
    rx_angles = np.array(sorted({r.rx_angle for r in records}))
    total = np.full((len(tx_angles), len(rx_angles)), np.nan, dtype=np.complex128)
    inc = np.full_like(total, np.nan)
    t_idx = {a: i for i, a in enumerate(tx_angles)}
    r_idx = {a: i for i, a in enumerate(rx_angles)}
    for r in records:
        i, j = t_idx[r.tx_angle], r_idx[r.rx_angle]
        if not np.isnan(total[i, j].real):
            raise DataFormatError(
                f"duplicate record for tx={r.tx_angle} rx={r.rx_angle}"
            )
        total[i, j] = r.total_field
        inc[i, j] = r.incident_field
    missing = np.argwhere(np.isnan(total.real))
    if missing.size:
        i, j = missing[0]
        raise DataFormatError(
            f"incomplete angle grid: no record for tx={tx_angles[i]} "
            f"rx={rx_angles[j]} ({len(missing)} gaps)"
        )
    return tx_angles, rx_angles, total, inc


def calibrate_fresnel(
    records: list[FresnelRecord], setup: ImagingSetup
) -> tuple[FieldSet, dict]:
    """Calibrated scattered fields from single-frequency Fresnel records.

    Scattered = total - incident; a per-transmitter complex factor c_t is
    fitted so that c_t * measured incident best matches the line-source
    model incident field at the receiver positions. Receivers within a
    thousandth of a wavelength of the active transmitter (where the model
    field is singular) are excluded from the fit. Returns the calibrated
    FieldSet and a report with per-transmitter residuals.
    """
    tx_angles, rx_angles, total, inc = records_grid(records)
    if len(tx_angles) != setup.n_tx or len(rx_angles) != setup.n_rx:
        raise DataFormatError(
            f"angle grid {len(tx_angles)}x{len(rx_angles)} does not match "
            f"setup {setup.n_tx}x{setup.n_rx}"
        )
    tx = setup.tx_positions
    rx = setup.rx_positions
    dist = np.hypot(
        rx[None, :, 0] - tx[:, 0, None], rx[None, :, 1] - tx[:, 1, None]
    )
    valid = dist > setup.lambda0 / 1000.0
    # Align measured angle order with the setup ring (both ascending from 0).
    scattered = np.empty_like(total)
    residuals = []
    for t in range(setup.n_tx):
        v = valid[t]
        if not v.any():
            raise DataFormatError(
                f"no usable receivers for tx={tx_angles[t]}"
            )
        model = green2d(setup.k0, dist[t, v])
        meas = inc[t, v]
        denom = np.vdot(meas, meas).real
        if denom <= 0:
            raise DataFormatError(f"missing incident data for tx={tx_angles[t]}")
        c = np.vdot(meas, model) / denom
        scattered[t] = c * (total[t] - inc[t])
        residuals.append(
            float(np.linalg.norm(c * meas - model) / np.linalg.norm(model))
        )
    report = {
        "per_tx_residual": residuals,
        "mean_residual": float(np.mean(residuals)),
        "max_residual": float(np.max(residuals)),
    }
    return FieldSet(values=scattered, kind="scattered-receiver"), report


def load_descriptor(path) -> dict:
    """Dataset descriptor JSON: geometry constants for a Fresnel target."""
    doc = json.loads(Path(path).read_text())
    for key in ("name", "tx_radius", "rx_radius", "frequencies"):
        if key not in doc:
            raise DataFormatError(f"{path}: descriptor missing field {key!r}")
    return doc
