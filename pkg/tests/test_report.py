import numpy as np
import pytest

from iscat import report
from iscat.scene import ContrastMap, GeometryError, Grid


def cmap_of(eps_r, m=4, side=0.15):
    return ContrastMap(chi=np.asarray(eps_r, dtype=np.complex128) - 1.0,
                       grid=Grid(m, side))


def test_rrmse_zero_for_identical_maps():
    rng = np.random.default_rng(0)
    eps = cmap_of(1.0 + rng.random((4, 4)) + 1j * rng.random((4, 4)))
    assert report.metric_rrmse(eps, eps) == 0.0


def test_rrmse_hand_oracle():
    truth = cmap_of(np.full((4, 4), 2.0))
    pred = cmap_of(np.full((4, 4), 2.0 + 0.5))
    # ||0.5 * ones|| / ||2 * ones|| = 0.25 independent of grid size
    assert report.metric_rrmse(pred, truth) == pytest.approx(0.25, abs=1e-15)


def test_rrmse_sign_symmetric():
    truth = cmap_of(np.full((4, 4), 2.0))
    up = cmap_of(np.full((4, 4), 2.3))
    down = cmap_of(np.full((4, 4), 1.7))
    assert report.metric_rrmse(up, truth) == pytest.approx(
        report.metric_rrmse(down, truth), rel=1e-12
    )


def test_rrmse_grid_mismatch():
    with pytest.raises(GeometryError):
        report.metric_rrmse(cmap_of(np.ones((4, 4))),
                            cmap_of(np.ones((8, 8)), m=8))


def test_support_mean():
    eps = np.ones((4, 4), dtype=np.complex128)
    eps[1, 1] = 3.0
    eps[2, 2] = 5.0
    truth = np.ones((4, 4), dtype=np.complex128)
    truth[1, 1] = truth[2, 2] = 2.0
    assert report.support_mean(cmap_of(eps), cmap_of(truth)) == 4.0 + 0j


def test_colormap_lut_endpoints_and_clip():
    lut = report.colormap_lut(np.array([-1.0, 0.0, 1.0, 2.0]), 0.0, 1.0)
    assert lut.shape == (4, 3) and lut.dtype == np.uint8
    assert np.array_equal(lut[0], lut[1])  # below vmin clips to vmin
    assert np.array_equal(lut[2], lut[3])  # above vmax clips to vmax
    with pytest.raises(ValueError):
        report.colormap_lut(np.zeros(2), 1.0, 1.0)


def test_render_deterministic(tmp_path):
    rng = np.random.default_rng(1)
    eps = cmap_of(1.0 + rng.random((4, 4)))
    a = report.render_map(eps, (1.0, 2.0), tmp_path / "a.png")
    b = report.render_map(eps, (1.0, 2.0), tmp_path / "b.png")
    assert a.read_bytes() == b.read_bytes()


def test_render_orientation_and_size(tmp_path):
    from PIL import Image

    eps_r = np.ones((4, 4))
    eps_r[0, 0] = 2.0  # row 0 should land at the image bottom
    path = report.render_map(cmap_of(eps_r), (1.0, 2.0), tmp_path / "m.png",
                             upscale=3)
    img = np.asarray(Image.open(path))
    assert img.shape == (12, 12, 3)
    lut = report.colormap_lut(np.array([1.0, 2.0]), 1.0, 2.0)
    assert np.array_equal(img[-1, 0], lut[1])  # hot pixel, bottom-left
    assert np.array_equal(img[0, 0], lut[0])  # background, top-left


def test_render_rejects_nonfinite(tmp_path):
    eps_r = np.ones((4, 4))
    eps_r[2, 2] = np.nan
    with pytest.raises(ValueError):
        report.render_map(cmap_of(eps_r), (1.0, 2.0), tmp_path / "x.png")


def test_benchmark_rows_and_csv(tmp_path):
    meas = {
        "austria": {"setup_s": 1.5, "epoch_mean_s": 0.2, "total_s": 301.5},
        "custom-case": {"setup_s": 0.5, "epoch_mean_s": 0.1, "total_s": 150.5},
    }
    rows = report.benchmark(meas)
    assert len(rows) == 2
    by_case = {r["case"]: r for r in rows}
    assert by_case["austria"]["reference_s"] == 27.91
    assert by_case["custom-case"]["reference_s"] == ""  # no published figure
    assert all(r["hardware"] for r in rows)

    path = tmp_path / "bench.csv"
    report.write_benchmark_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "case,setup_s,epoch_mean_s,total_s,reference_s,hardware"
    assert len(lines) == 3


def test_stopwatch_laps_accumulate():
    sw = report.Stopwatch()
    a = sw.lap()
    b = sw.lap()
    assert a >= 0.0 and b >= 0.0
