import numpy as np
import pytest
from hypothesis import settings

from rtclass.synth import generate_dataset
from rtclass.trace_model import Label, Tech

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

# one line per acceptance criterion, echoed in the terminal summary
CRITERIA: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def uwb_binary():
    ds, _ = generate_dataset({Label.IDLE: 20, Label.BICYCLE: 20}, Tech.UWB, seed=11)
    return ds


@pytest.fixture(scope="session")
def uwb_multi():
    ds, _ = generate_dataset({Label.IDLE: 15, Label.BICYCLE: 15, Label.CAR_LIKE: 15},
                             Tech.UWB, seed=12)
    return ds


@pytest.fixture(scope="session")
def csi_multi():
    ds, _ = generate_dataset({Label.IDLE: 12, Label.BICYCLE: 12, Label.CAR_LIKE: 12},
                             Tech.WLAN_CSI, seed=13, overrides={"duration_s": 2.5})
    return ds


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
