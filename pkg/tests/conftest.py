import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gansynth import data as D

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE = []


def record_acceptance(criterion, passed, detail):
    """Remember one acceptance verdict; all are printed at the end of the run."""
    status = {True: "PASS", False: "FAIL", None: "NOT VERIFIED"}[passed]
    _ACCEPTANCE.append((criterion, status, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {criterion}: {status} - {detail}")


def make_dataset(features, labels, names=None):
    features = np.asarray(features, dtype=np.float64)
    names = names or tuple(f"f{i}" for i in range(features.shape[1]))
    return D.Dataset(names, features, np.asarray(labels), "label")


@pytest.fixture
def blob_dataset():
    """Two separated Gaussian blobs in [0,1]^2, label = blob id."""
    rng = np.random.default_rng(7)
    n = 60
    a = rng.normal([0.25, 0.25], 0.05, size=(n, 2))
    b = rng.normal([0.75, 0.7], 0.05, size=(n, 2))
    x = np.clip(np.vstack([a, b]), 0, 1)
    y = np.r_[np.zeros(n, int), np.ones(n, int)]
    order = rng.permutation(2 * n)
    return make_dataset(x[order], y[order])


def write_toy_csv(path, n=60, seed=0, minority=0.3):
    rng = np.random.default_rng(seed)
    y = (rng.random(n) < minority).astype(int)
    y[:2] = [0, 1]
    y[-2:] = [1, 0]
    x = rng.normal(size=(n, 3)) + 1.5 * y[:, None]
    with open(path, "w") as handle:
        handle.write("id,a,b,c,cls\n")
        for i, (row, label) in enumerate(zip(x, y)):
            handle.write(f"{i},{row[0]:.17g},{row[1]:.17g},{row[2]:.17g},{'P' if label else 'N'}\n")
    return path


@pytest.fixture
def toy_csv(tmp_path):
    return write_toy_csv(tmp_path / "toy.csv")
