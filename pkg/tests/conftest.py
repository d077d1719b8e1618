from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from raidnav.config import load_config
from raidnav.scenario import run_scenario

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

settings.register_profile("default", deadline=None, max_examples=200)
settings.load_profile("default")


@pytest.fixture(scope="session")
def nominal_cfg():
    return load_config(CONFIGS / "nominal.json")


@pytest.fixture(scope="session")
def nominal_raid(nominal_cfg):
    return run_scenario(nominal_cfg, "raid")


@pytest.fixture(scope="session")
def nominal_pid(nominal_cfg):
    return run_scenario(nominal_cfg, "pid")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
