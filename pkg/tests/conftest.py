import json
from pathlib import Path

import pytest

from decaykit.dos import narrow_resonance

DATA = Path(__file__).resolve().parent / "data"


def _load(name):
    return json.loads((DATA / name).read_text())


@pytest.fixture(scope="session")
def gamma_oracle():
    return _load("gamma_oracle.json")["points"]


@pytest.fixture(scope="session")
def decay_oracle():
    return _load("decay_oracle.json")


@pytest.fixture(scope="session")
def standard_dos():
    """x_d = 0.1, nu = 1/2, b_s = 1 narrow resonance."""
    return narrow_resonance(0.1, 0.5, 1.0)


def as_complex(pair):
    return complex(float(pair[0]), float(pair[1]))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key][1])
