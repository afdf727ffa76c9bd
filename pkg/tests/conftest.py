import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from greedynewton import LogisticProblem

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def random_logistic(rng, m=30, n=5, reg=0.0, scale=1.0):
    A = scale * rng.standard_normal((m, n))
    b = np.where(rng.standard_normal(m) >= 0, 1.0, -1.0)
    return LogisticProblem(A, b, reg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_example():
    return LogisticProblem(np.eye(2), np.array([1.0, -1.0]))


@pytest.fixture(scope="session")
def comparison(tmp_path_factory):
    """Default comparison: 4 regimes x {0, 1} x 3 methods, budget 25."""
    from greedynewton.bench import ExperimentConfig, run_comparison

    out = tmp_path_factory.mktemp("comparison")
    cells = run_comparison(ExperimentConfig(out_dir=out), echo=lambda s: None)
    return out, cells


@pytest.fixture(scope="session")
def plane_comparison(tmp_path_factory):
    from greedynewton import Method
    from greedynewton.bench import ExperimentConfig, run_comparison

    out = tmp_path_factory.mktemp("plane")
    cells = run_comparison(ExperimentConfig(out_dir=out, methods=[Method.PLANE_NEWTON]), echo=lambda s: None)
    return out, cells


@pytest.fixture(scope="session")
def armijo_sweep(tmp_path_factory):
    from greedynewton.bench import ExperimentConfig, run_armijo_sweep

    out = tmp_path_factory.mktemp("sweep")
    cells = run_armijo_sweep(ExperimentConfig(out_dir=out), echo=lambda s: None)
    return out, cells


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
