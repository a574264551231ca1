import numpy as np
import pytest
from hypothesis import settings

from multidendro import ProximityMatrix
from multidendro.data import load

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

TOY = np.array([[0, 2, 4, 7],
                [2, 0, 2, 5],
                [4, 2, 0, 3],
                [7, 5, 3, 0]], dtype=float)


def random_matrix(rng, n, kind="distance", pool=None, digits=None):
    """Random symmetric proximity matrix; `pool` draws values from a set."""
    k = n * (n - 1) // 2
    if pool is not None:
        vals = rng.choice(np.asarray(pool, dtype=float), size=k)
    elif kind == "distance":
        vals = rng.uniform(0.5, 10.0, size=k)
    else:
        vals = rng.uniform(0.0, 1.0, size=k)
    if digits is not None:
        vals = np.round(vals, digits)
    labels = [f"o{i}" for i in range(n)]
    return ProximityMatrix(labels, vals, kind)


def euclidean_matrix(points, labels=None):
    x = np.asarray(points, dtype=float)
    d = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(-1))
    return ProximityMatrix.from_square(d, labels)


@pytest.fixture
def toy():
    return ProximityMatrix.from_square(TOY, ["x1", "x2", "x3", "x4"])


@pytest.fixture(scope="session")
def cities():
    return load("uscities")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for ac in sorted(mod.RESULTS, key=lambda a: int(a.split("-")[1])):
        ok, detail = mod.RESULTS[ac]
        terminalreporter.write_line(f"{ac} {'PASS' if ok else 'FAIL'}: {detail}")
