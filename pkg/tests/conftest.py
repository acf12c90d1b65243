import numpy as np
import pytest
from hypothesis import strategies as st

from itdm.qcore import EncodingAxis, SingleQubitState

angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)
probabilities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def axes(draw):
    v = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3))
    if np.linalg.norm(v) < 1e-3:
        v = [0.0, 0.0, 1.0]
    return EncodingAxis.normalized(v)


@st.composite
def qubits(draw):
    return SingleQubitState(draw(probabilities), draw(st.floats(0, 2 * np.pi, allow_nan=False)))


@st.composite
def bloch_vectors(draw):
    v = np.array(draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=3, max_size=3)))
    n = np.linalg.norm(v)
    return v / n if n > 1 else v


def random_axis(rng):
    return EncodingAxis.normalized(rng.normal(size=3))


def random_qubit(rng):
    return SingleQubitState(float(rng.uniform()), float(rng.uniform(0, 2 * np.pi)))


def random_bloch(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * rng.uniform() ** (1 / 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for r in sorted(test_acceptance.RESULTS, key=lambda r: r.number):
            terminalreporter.write_line(r.line())
