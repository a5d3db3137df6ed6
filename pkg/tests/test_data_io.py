import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iscat import data_io
from iscat.data_io import DataFormatError, FresnelRecord
from iscat.forward import FieldSet
from iscat.operators import build_operators
from iscat.scene import ContrastMap, Grid, ImagingSetup, ShapeSpec, default_grid, default_setup

from conftest import random_complex


def test_scene_roundtrip(tmp_path):
    shapes = [
        ShapeSpec.disc((0.01, -0.02), 0.015, 2.0 + 0.5j),
        ShapeSpec.annulus((0, 0), 0.03, 0.05, 1.5),
        ShapeSpec.rectangle((0.02, 0.02), 0.01, 0.02, 3.0),
    ]
    grid = default_grid(32)
    setup = default_setup()
    path = tmp_path / "scene.json"
    data_io.save_scene(path, shapes, grid, setup)
    shapes2, grid2, setup2 = data_io.load_scene(path)
    assert grid2 == grid
    assert setup2.freq == setup.freq
    assert setup2.ring_radius == setup.ring_radius
    assert shapes2 == shapes


def test_scene_schema_version_rejected(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text('{"schema": 0, "grid": {"m": 8, "side_len": 0.15}}')
    with pytest.raises(DataFormatError, match="version"):
        data_io.load_scene(path)


def test_fields_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    f = FieldSet(random_complex(rng, (5, 7)), kind="scattered-receiver")
    path = tmp_path / "fields.csv"
    data_io.save_fields_csv(path, f)
    g = data_io.load_fields_csv(path)
    assert np.array_equal(f.values, g.values)  # 17 digits round-trip float64


def test_fields_csv_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("tx,rx,re\n0,0,1.0\n")
    with pytest.raises(DataFormatError, match="im"):
        data_io.load_fields_csv(path)


def test_fields_csv_bad_row_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("tx,rx,re,im\n0,0,1.0,2.0\n0,1,oops,0.0\n")
    with pytest.raises(DataFormatError, match=":3"):
        data_io.load_fields_csv(path)


def test_fields_csv_incomplete_grid(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("tx,rx,re,im\n0,0,1.0,2.0\n1,1,1.0,2.0\n")
    with pytest.raises(DataFormatError, match="incomplete"):
        data_io.load_fields_csv(path)


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=25, deadline=None)
@given(n_tx=st.integers(1, 5), n_rx=st.integers(1, 5),
       seed=st.integers(0, 2 ** 31), re0=finite, im0=finite)
def test_fields_roundtrips_preserve_any_values(tmp_path_factory, n_tx, n_rx,
                                               seed, re0, im0):
    """CSV (17 significant digits) and binary dumps are lossless for
    arbitrary finite float64 values, including extremes."""
    tmp_path = tmp_path_factory.mktemp("fields")
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((n_tx, n_rx)) * np.exp(
        1j * rng.uniform(0, 2 * np.pi, (n_tx, n_rx))
    )
    values[0, 0] = complex(re0, im0)
    f = FieldSet(values, kind="scattered-receiver")
    p_csv, p_bin = tmp_path / "f.csv", tmp_path / "f.bin"
    data_io.save_fields_csv(p_csv, f)
    data_io.save_fields_bin(p_bin, f)
    assert np.array_equal(data_io.load_fields_csv(p_csv).values, values)
    assert np.array_equal(data_io.load_fields_bin(p_bin).values, values)


def test_fields_binary_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    f = FieldSet(random_complex(rng, (4, 9)), kind="scattered-receiver")
    path = tmp_path / "fields.bin"
    data_io.save_fields_bin(path, f)
    g = data_io.load_fields_bin(path)
    assert np.array_equal(f.values, g.values)


def test_fields_binary_bad_magic(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTMAGIC" + b"\0" * 40)
    with pytest.raises(DataFormatError, match="magic"):
        data_io.load_fields_bin(path)


def test_operator_dump_roundtrip(tmp_path):
    ops = build_operators(Grid(6, 0.15), ImagingSetup(freq=4e9, n_tx=3, n_rx=5))
    path = tmp_path / "ops.bin"
    data_io.dump_operators(path, ops)
    back = data_io.load_operator_arrays(path)
    assert back["m"] == 6 and back["n_rx"] == 5
    assert back["k0"] == ops.k0
    assert np.array_equal(back["gs"], ops.gs)
    assert np.array_equal(back["gd_kernel"], ops.gd_kernel)
    assert back["self_term"] == ops.self_term


def test_eps_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    grid = Grid(8, 0.15)
    eps = ContrastMap(random_complex(rng, (8, 8)) * 0.3, grid)
    path = tmp_path / "eps.csv"
    data_io.save_eps_csv(path, eps)
    back = data_io.load_eps_csv(path, grid)
    assert np.array_equal(eps.eps_r, back.eps_r)  # eps_r is what the file stores


# ---------------------------------------------------------------------------
# Fresnel parsing and calibration
# ---------------------------------------------------------------------------
FRESNEL_FIXTURE = """\
# synthetic fixture, 3 records
   0.0  60.0  4.0  1.5  -0.25  0.75  0.1
  10.0  60.0  4.0  -2.0  0.5   0.5   -0.3
  10.0  65.0  4.0  0.125  0.0  0.25  0.0625
"""


def test_parse_fresnel_fixture(tmp_path):
    path = tmp_path / "fixture.exp"
    path.write_text(FRESNEL_FIXTURE)
    records = data_io.parse_fresnel(path)
    assert len(records) == 3
    assert records[0] == FresnelRecord(0.0, 60.0, 4e9, 1.5 - 0.25j, 0.75 + 0.1j)
    assert records[2].total_field == 0.125 + 0j


def test_parse_fresnel_empty(tmp_path):
    path = tmp_path / "empty.exp"
    path.write_text("# only comments\n\n")
    assert data_io.parse_fresnel(path) == []


def test_parse_fresnel_bad_arity(tmp_path):
    path = tmp_path / "bad.exp"
    path.write_text("0.0 10.0 4.0 1.0 2.0 3.0\n")
    with pytest.raises(DataFormatError, match=":1"):
        data_io.parse_fresnel(path)


def test_records_grid_detects_gap():
    recs = [
        FresnelRecord(0.0, 0.0, 4e9, 1 + 0j, 1 + 0j),
        FresnelRecord(0.0, 90.0, 4e9, 1 + 0j, 1 + 0j),
        FresnelRecord(180.0, 0.0, 4e9, 1 + 0j, 1 + 0j),
    ]
    with pytest.raises(DataFormatError, match="incomplete"):
        data_io.records_grid(recs)


def make_synthetic_records(setup, scattered, scale=1.0 + 0.0j):
    """Records generated from the model itself (line-source incident).

    The receiver coincident with the active transmitter gets a finite
    placeholder incident value; calibration excludes it from the fit.
    """
    from iscat.operators import green2d

    tx, rx = setup.tx_positions, setup.rx_positions
    dist = np.hypot(
        rx[None, :, 0] - tx[:, 0, None], rx[None, :, 1] - tx[:, 1, None]
    )
    inc = np.full(dist.shape, 1.0 + 0.0j)
    ok = dist > 1e-12
    inc[ok] = green2d(setup.k0, dist[ok])
    tx_ang = np.degrees(np.arctan2(setup.tx_positions[:, 1], setup.tx_positions[:, 0])) % 360
    rx_ang = np.degrees(np.arctan2(setup.rx_positions[:, 1], setup.rx_positions[:, 0])) % 360
    recs = []
    for t in range(setup.n_tx):
        for r in range(setup.n_rx):
            recs.append(
                FresnelRecord(
                    round(tx_ang[t], 9), round(rx_ang[r], 9), setup.freq,
                    scale * (inc[t, r] + scattered[t, r]),
                    scale * inc[t, r],
                )
            )
    return recs


def test_calibrate_self_consistent_records():
    setup = ImagingSetup(freq=4e9, n_tx=4, n_rx=8)
    rng = np.random.default_rng(3)
    scattered = random_complex(rng, (4, 8)) * 0.01
    recs = make_synthetic_records(setup, scattered)
    fields, report = data_io.calibrate_fresnel(recs, setup)
    assert report["max_residual"] < 1e-12
    assert np.allclose(fields.values, scattered, rtol=1e-10)


def test_calibrate_invariant_to_global_scale():
    setup = ImagingSetup(freq=4e9, n_tx=4, n_rx=8)
    rng = np.random.default_rng(4)
    scattered = random_complex(rng, (4, 8)) * 0.01
    a, _ = data_io.calibrate_fresnel(make_synthetic_records(setup, scattered), setup)
    b, _ = data_io.calibrate_fresnel(
        make_synthetic_records(setup, scattered, scale=2.5 - 1.5j), setup
    )
    assert np.allclose(a.values, b.values, rtol=1e-10)


def test_descriptor_load(tmp_path):
    import json

    doc = {"name": "X", "tx_radius": 1.67, "rx_radius": 1.67, "frequencies": [4e9]}
    path = tmp_path / "desc.json"
    path.write_text(json.dumps(doc))
    assert data_io.load_descriptor(path)["name"] == "X"
    path.write_text(json.dumps({"name": "X"}))
    with pytest.raises(DataFormatError):
        data_io.load_descriptor(path)
