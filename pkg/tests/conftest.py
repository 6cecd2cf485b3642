import numpy as np
import pytest

from marylab.arithmetic import golden_frequency
from marylab.model import ModelParams, build_symbol


@pytest.fixture(scope="session")
def golden():
    return golden_frequency()


@pytest.fixture(scope="session")
def default_symbol():
    return build_symbol(1.0, "exp_decay", decay=1.0, margin=0.99)


@pytest.fixture(scope="session")
def default_params(golden, default_symbol):
    return ModelParams(freq=golden, symbol=default_symbol, eps=0.01, E=0.0)


@pytest.fixture(scope="session")
def free_params(golden, default_symbol):
    """eps = 0: the operator is diagonal."""
    return ModelParams(freq=golden, symbol=default_symbol, eps=0.0, E=0.0)


def det_recursive(m):
    """Plain Laplace expansion along the first row; test-side determinant oracle."""
    m = np.asarray(m)
    n = m.shape[0]
    if n == 0:
        return 1.0
    if n == 1:
        return m[0, 0]
    total = 0.0
    for j in range(n):
        if m[0, j] == 0.0:
            continue
        sub = np.delete(m[1:], j, axis=1)
        total += (-1.0) ** j * m[0, j] * det_recursive(sub)
    return total
