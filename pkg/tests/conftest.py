import os
import tempfile

# log and data directories are created at import time
os.environ.setdefault("GESEDD_DIR_OUTPUT", tempfile.mkdtemp(prefix="gesedd-test-"))

import numpy as np
import pytest

from sub_nyquist_radar_lib.aic.measurement_matrix import make_matrix
from sub_nyquist_radar_lib.harness.config import RunConfig, profile_dict, deep_merge
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.scene import Scene, DelayClass
from sub_nyquist_radar_lib.model.signal import padded_pulse

# N = 256, M = 64, L = 32, 64-sample pulse
SMALL_RADAR = {"B": 1.0e8, "T": 2.56e-6, "T_p": 0.64e-6, "L": 32, "M": 64}

SMALL_OVERRIDES = {
    "seed": 7,
    "radar": SMALL_RADAR,
    "scene": {"K_tau": 3, "delay_range": [0.0, 1.28e-6], "doppler_range": [-175781.25, 175781.25]},
    "clutter": {"n_scatterers": 50, "delay_span": [0.0, 1.28e-6], "cutoff": 36000.0},
    "sweep": {
        "trials": 2,
        "snr_db": ["noiseless", 30.0],
        "separations": [10.0],
        "resolution_snr_db": "noiseless",
        "scr_db": ["none"],
        "theorem1_N": 64,
        "theorem1_M": [1, 4, 8],
        "theorem1_K_tau": [1, 2],
        "theorem2_K_tau": [2, 3],
        "com_M": [4, 8],
        "com_N": 32,
    },
    "output": {"record_runtime": False, "svg": True},
}


@pytest.fixture
def params() -> RadarParams:
    return RadarParams(**SMALL_RADAR)


@pytest.fixture
def pulse(params) -> np.ndarray:
    return padded_pulse(params)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def gaussian(params):
    return make_matrix("gaussian", params.M, params.N, seed=3)


@pytest.fixture
def three_class_scene(params) -> Scene:
    return Scene((
        DelayClass(0.337e-6, ((1.3 * params.nu0, 1.0),)),
        DelayClass(0.6123e-6, ((-4.6 * params.nu0, 0.7j),)),
        DelayClass(0.912e-6, ((6.2 * params.nu0, 0.4 - 0.3j),)),
    ))


@pytest.fixture
def small_config_dict() -> dict:
    return deep_merge(profile_dict("desk"), SMALL_OVERRIDES)


@pytest.fixture
def small_config(small_config_dict) -> RunConfig:
    return RunConfig.from_dict(small_config_dict)
