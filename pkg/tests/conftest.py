import numpy as np
import pytest

from strongsplit.operators import LinearMonotoneOperator, random_monotone_matrix


def linear_pair(seed, n=6, skew=0.0):
    """Two random monotone linear operators, ``z`` and the oracle ``(I+M1+M2)^{-1} z``."""
    rng = np.random.default_rng(seed)
    M1 = random_monotone_matrix(rng, n, skew=skew)
    M2 = random_monotone_matrix(rng, n, skew=skew)
    z = rng.standard_normal(n)
    u = np.linalg.solve(np.eye(n) + M1 + M2, z)
    return LinearMonotoneOperator(M1, "M1"), LinearMonotoneOperator(M2, "M2"), z, u


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria register here and are echoed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
