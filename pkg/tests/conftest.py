import numpy as np
import pytest

from deconvreg import DesignGrid, Sample

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_sample(y, variant="simulation"):
    y = np.asarray(y, dtype=float)
    return Sample(DesignGrid((y.size - 1) // 2, variant), y)


def direct_coefficients(x, y, K):
    """Hand-rolled R_hat(k) = mean_j y_j exp(-i 2 pi k x_j)."""
    out = []
    for k in range(-K, K + 1):
        acc = 0j
        for xj, yj in zip(x, y):
            acc += yj * np.exp(-2j * np.pi * k * xj)
        out.append(acc / len(y))
    return np.array(out)


def random_hermitian(rng, K, scale=1.0):
    pos = scale * (rng.standard_normal(K) + 1j * rng.standard_normal(K))
    return np.concatenate([np.conj(pos[::-1]), [scale * rng.standard_normal()], pos])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
