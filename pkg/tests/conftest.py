import copy
import os
import subprocess
import sys

import pytest

from weakdis import ProfileSpec, Wavepacket, WeightDistribution, build_lattice

STD_MODEL = {
    "d": 1,
    "L": 2.0,
    "K": 8,
    "profile": {"kind": "gaussian", "b0": 1.0, "sigma": 1.0},
    "weights": {"kind": "rademacher"},
    "psi1": {"x0": [0.0], "a": [0.0], "sigma": 1.0},
    "psi2": {"x0": [0.25], "a": [1.0], "sigma": 1.0},
}


@pytest.fixture(scope="session")
def std_lattice():
    return build_lattice(1, 2.0, 8)


@pytest.fixture(scope="session")
def gauss_profile():
    return ProfileSpec(kind="gaussian", b0=1.0, sigma=1.0)


@pytest.fixture(scope="session")
def bump_profile():
    return ProfileSpec(kind="cosine-bump", b0=1.0, r=0.5)


@pytest.fixture(scope="session")
def rademacher():
    return WeightDistribution(kind="rademacher")


@pytest.fixture(scope="session")
def psi_pair():
    psi1 = Wavepacket(x0=(0.0,), a=(0.0,), sigma=1.0)
    psi2 = Wavepacket(x0=(0.25,), a=(1.0,), sigma=1.0)
    return psi1, psi2


@pytest.fixture()
def std_model_dict():
    return copy.deepcopy(STD_MODEL)


@pytest.fixture(scope="session")
def run_cli():
    def run(study, config_path, out_dir, *extra, env_extra=None):
        env = os.environ.copy()
        env.pop("ENGINE_THREADS", None)
        if env_extra:
            env.update(env_extra)
        return subprocess.run(
            [sys.executable, "-m", "weakdis", study,
             "--config", str(config_path), "--out", str(out_dir), *extra],
            capture_output=True, text=True, env=env)

    return run
