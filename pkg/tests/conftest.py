import numpy as np
import pytest

from onflow.data import PAIRS, load_nyse

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def nyse():
    return load_nyse()


@pytest.fixture(scope="session")
def pair_relatives(nyse):
    return {n: nyse.select(names) for n, names in PAIRS.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_allocation(rng, k):
    return rng.dirichlet(np.ones(k))


def random_relatives(rng, T, K, spread=0.1):
    return np.exp(rng.normal(0.0, spread, size=(T, K)))


def central_gradient(fun, H, h=1e-6):
    g = np.zeros_like(H)
    for b in range(H.size):
        e = np.zeros_like(H)
        e[b] = h
        g[b] = (fun(H + e) - fun(H - e)) / (2 * h)
    return g


def naive_wealth(targets, rel, xi):
    """Scalar loops over plain lists; no numpy."""
    wealth = [1.0]
    turnover = 0.0
    for t in range(len(rel)):
        held = targets[t]
        growth = 0.0
        for k in range(len(held)):
            growth += held[k] * rel[t][k]
        drift = [held[k] * rel[t][k] / growth for k in range(len(held))]
        traded = 0.0
        for k in range(len(held)):
            traded += abs(drift[k] - targets[t + 1][k])
        turnover += traded
        wealth.append(wealth[-1] * growth * (1.0 - xi * traded))
    return wealth, turnover


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
