import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from relaychua import Params

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# positive parameters on the range used throughout the tests
positive = st.floats(min_value=1e-2, max_value=10.0, allow_nan=False, allow_infinity=False)
params_st = st.builds(Params, positive, positive)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def random_params(rng):
    ab = rng.uniform(0.0, 10.0, size=(100, 2))
    ab = np.where(ab == 0.0, 1e-3, ab)
    return [Params(float(a), float(b)) for a, b in ab]


@pytest.fixture
def desk():
    return Params(5.0, 5.0)


@pytest.fixture
def captured_regime():
    return Params(0.25, 5.0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
