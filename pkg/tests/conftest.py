import numpy as np
import pytest
import torch

from iscat.forward import incident_fields, scattered_fields, solve_total_field
from iscat.operators import build_operators
from iscat.scene import Grid, ImagingSetup, ShapeSpec, rasterize_scene

torch.set_num_threads(1)

FIXTURE_RADIUS = 0.03
FIXTURE_EPS = 2.0


@pytest.fixture(scope="session")
def small_setup():
    return ImagingSetup(freq=4e9, n_tx=12, n_rx=12)


@pytest.fixture(scope="session")
def small_grid():
    return Grid(16, 0.15)


@pytest.fixture(scope="session")
def small_ops(small_grid, small_setup):
    return build_operators(small_grid, small_setup)


@pytest.fixture(scope="session")
def small_disc_data(small_grid, small_setup, small_ops):
    """Noiseless single-disc forward data at desk scale (16x16, 12 tx)."""
    truth = rasterize_scene(
        [ShapeSpec.disc((0, 0), FIXTURE_RADIUS, FIXTURE_EPS)], small_grid
    )
    e_inc = incident_fields(small_setup, small_grid)
    e_tot, j = solve_total_field(truth, e_inc, small_ops)
    e_sca = scattered_fields(j, small_ops)
    return {
        "truth": truth,
        "e_inc": e_inc,
        "e_tot": e_tot,
        "j": j,
        "e_sca": e_sca,
    }


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
