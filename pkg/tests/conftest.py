import math

import numpy as np
import pytest
from hypothesis import strategies as st

from chainwatch.chain import BasisChange, MeasurementChain, Preparation
from chainwatch.numerics import random_unitary

PI8 = math.pi / 8
SIN2_PI8 = 0.14644660940672624  # sin^2(pi/8)
H_SIN2_PI8 = 0.6008760366928562  # binary entropy of sin^2(pi/8)
H_QUARTER = 0.8112781244591328  # binary entropy of 1/4


def make_random_chain(seed, n, m):
    rng = np.random.default_rng(seed)
    prep = Preparation(random_unitary(n, rng)[:, 0])
    return MeasurementChain(prep, tuple(BasisChange(random_unitary(n, rng)) for _ in range(m)))


@st.composite
def random_chains(draw, dims=(2, 3), max_steps=4):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.sampled_from(dims))
    m = draw(st.integers(0, max_steps))
    return make_random_chain(seed, n, m)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
