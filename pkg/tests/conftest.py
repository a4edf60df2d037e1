import os
from pathlib import Path

import numpy as np
import pytest

from lpep.glm import Dataset
from lpep.io import bundled_path, load_csv

FIXTURES = Path(__file__).parent / "fixtures"


def urinary_path():
    """Location of the urinary fixture, or None when it is not vendored."""
    env = os.environ.get("LPEP_URINARY_CSV")
    for cand in (env, FIXTURES / "urinary.csv"):
        if cand and Path(cand).is_file():
            return Path(cand)
    return None


@pytest.fixture(scope="session")
def tiny8():
    return load_csv(FIXTURES / "tiny8.csv", "y")


@pytest.fixture(scope="session")
def endometrial():
    return load_csv(bundled_path("endometrial.csv"), "HG")


@pytest.fixture(scope="session")
def urinary():
    path = urinary_path()
    if path is None:
        pytest.skip("urinary fixture not available (set LPEP_URINARY_CSV)")
    return load_csv(path, os.environ.get("LPEP_URINARY_RESPONSE", "y"))


def random_dataset(rng, n, p, scale=1.0, beta=None):
    X = np.column_stack([np.ones(n), rng.standard_normal((n, p))])
    if beta is None:
        beta = scale * rng.standard_normal(p + 1) / np.sqrt(p + 1)
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-X @ beta))).astype(float)
    return Dataset(y=y, X=X)


# ----------------------------------------------------- acceptance reporting

_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail)``; lines are printed immediately and
    repeated in the terminal summary."""

    def record(key, passed, detail):
        line = f"ACCEPTANCE {key}: {'PASS' if passed else 'FAIL'} | {detail}"
        _ACCEPTANCE[key] = line
        print("\n" + line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0])):
        terminalreporter.write_line(_ACCEPTANCE[key])
