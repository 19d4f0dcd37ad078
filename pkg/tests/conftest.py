import json

import numpy as np
import pytest

from clvkit import RunConfig, make_system, run_transient_clv

# Reference run: start high on the z axis, reach the equilibrium by step
# 15000, keep sweeping to step 30000 for the backward burn-in.
REFERENCE = RunConfig()

# Cheap variant of the same experiment for CLI round trips: the orbit from
# z=50 reaches the equilibrium within ~55 time units, so n1=700 is safe.
SHORT_RUN_KWARGS = dict(u0=(0.0, 0.0, 50.0), n1=700, n2=1500)


@pytest.fixture(scope="session")
def paper_run():
    return run_transient_clv(REFERENCE)


@pytest.fixture(scope="session")
def paper_record(paper_run):
    return paper_run.record


@pytest.fixture(scope="session")
def short_run():
    return run_transient_clv(RunConfig(**SHORT_RUN_KWARGS))


@pytest.fixture()
def paper_system():
    return make_system("paper3d")


@pytest.fixture()
def diag3():
    return make_system("diag-linear", {"diag": [2.0, 1.0, -1.0]})


def short_config_dict(**overrides):
    cfg = {
        "system": "paper3d",
        "u0": [0.0, 0.0, 50.0],
        "n1": 700,
        "n2": 1500,
        "out_dir": "out",
    }
    cfg.update(overrides)
    return cfg


@pytest.fixture()
def short_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(short_config_dict()))
    return path


def random_state(rng, lo=-5.0, hi=5.0, dim=3):
    return rng.uniform(lo, hi, size=dim)


def max_abs(a):
    return float(np.max(np.abs(a)))
