import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(1234))


def random_spd(rng, n, dim, shift=0.1):
    m = rng.standard_normal((n, dim, dim))
    return m @ np.swapaxes(m, -1, -2) + shift * np.eye(dim)


def asym_defect(b, g, a_full):
    r = b @ g + a_full @ b
    return r - np.swapaxes(r, -1, -2)


def oracle_symmetrizer(b, g):
    """Antisymmetric entries found by treating the symmetry condition as an
    unknown linear map: probe it on unit vectors and solve densely."""
    d = b.shape[-1]
    pairs = [(0, 1)] if d == 2 else [(0, 1), (0, 2), (1, 2)]

    def defect(coeffs):
        a = np.zeros((d, d))
        for c, (i, j) in zip(coeffs, pairs):
            a[i, j], a[j, i] = c, -c
        r = b @ g + a @ b
        return np.array([r[i, j] - r[j, i] for i, j in pairs])

    d0 = defect(np.zeros(len(pairs)))
    cols = [defect(np.eye(len(pairs))[k]) - d0 for k in range(len(pairs))]
    return np.linalg.solve(np.column_stack(cols), -d0)


# one line per acceptance criterion, repeated at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
