import numpy as np
import pytest

from tsfloquet.shifts import PeriodClock, multiplicative_shifts
from tsfloquet.timescale import (
    geometric_union_window,
    integer_window,
    q_scale_window,
    real_window,
)
from tsfloquet.transition import MatrixFunction


@pytest.fixture
def q2_window():
    return q_scale_window(2.0, 1.0, 32.0)


@pytest.fixture
def q2_shifts():
    return multiplicative_shifts(2.0)


@pytest.fixture
def q2_clock(q2_shifts):
    return PeriodClock(q2_shifts)


@pytest.fixture
def union_window():
    return geometric_union_window(3.0, 2.0, 1.0, 54.0)


@pytest.fixture
def union_shifts():
    return multiplicative_shifts(3.0)


@pytest.fixture
def real01_window():
    return real_window(0.0, 10.0)


@pytest.fixture
def int_window():
    return integer_window(0.0, 12.0)


@pytest.fixture
def diag_inv_t():
    return MatrixFunction.from_exprs([["1/t", "0"], ["0", "1/t"]])


@pytest.fixture
def cosine_window():
    return real_window(1.0, 64.0)


@pytest.fixture
def cosine_system():
    entry = "(1/t)*cos(pi*ln(t)/ln(q))"
    return MatrixFunction.from_exprs([[entry, "0"], ["0", entry]], {"q": 2.0})


@pytest.fixture
def cosine_shifts():
    return multiplicative_shifts(4.0)


def rel_err(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) / scale
