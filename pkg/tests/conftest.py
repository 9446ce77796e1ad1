import math

import numpy as np
import pytest

from rimnull.geometry import FeedModel, build_reflector
from rimnull.pofield import RimReflector


@pytest.fixture(scope="session")
def dish():
    """The 18 m / 1.5 GHz / 0.5 m rim scenario."""
    model, segments = build_reflector()
    return RimReflector(model, FeedModel.normalized(1.0), segments)


@pytest.fixture(scope="session")
def small_dish():
    """A 3 m dish at 1.5 GHz: same physics, fast quadrature."""
    model, segments = build_reflector(diameter=3.0, rim_depth=0.3)
    return RimReflector(model, FeedModel.normalized(1.0), segments)


@pytest.fixture(scope="session")
def first_sidelobe_peak(dish):
    """Angle (rad) of the first sidelobe maximum of the standard dish in the cut."""
    ones = np.ones(dish.n_segments)
    grid = np.radians(np.arange(1.0, 1.6, 0.005))
    g = [abs(dish.field(ones, a)[0]) for a in grid]
    # skip the main-lobe skirt: start after the first null
    first_null = int(np.argmin(g[: len(g) // 2]))
    return float(grid[first_null + int(np.argmax(g[first_null:]))])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def deg(x):
    return math.radians(x)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion; shown in the terminal summary."""
    store = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        store[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(ACCEPTANCE_KEY, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for number in sorted(store):
            terminalreporter.write_line(store[number])
