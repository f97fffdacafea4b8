"""Benchmark strategies: buy-and-hold, CRP, best CRP, EG and Cover's UP.

Every ``*_allocate`` function returns a ``(T + 1, K)`` array whose row ``t``
is the target held during step ``t``. Updates ignore fees; the backtest
charges them.
"""

import itertools

import numpy as np

from .costs import drifted_allocation
from .data import PriceRelativeSeries
from .exceptions import InvalidArgumentError, UnsupportedDimensionError
from .simplex import as_allocation, uniform


def _relatives(rel):
    x = rel.relatives if isinstance(rel, PriceRelativeSeries) else np.asarray(rel, dtype=float)
    if x.ndim != 2:
        raise InvalidArgumentError(f"expected a (T, K) array of relatives, got shape {x.shape}")
    if not np.all(x > 0):
        raise InvalidArgumentError("price relatives must be strictly positive")
    return x


def _allocation_for(pi, n_assets):
    pi = as_allocation(pi)
    if pi.size != n_assets:
        raise InvalidArgumentError(f"allocation has {pi.size} entries for {n_assets} assets")
    return pi


def crp_allocate(rel, pi):
    x = _relatives(rel)
    pi = _allocation_for(pi, x.shape[1])
    return np.tile(pi, (x.shape[0] + 1, 1))


def buy_and_hold_allocate(rel, initial):
    """Targets equal to the drifted weights, so no trade ever happens."""
    x = _relatives(rel)
    pi = _allocation_for(initial, x.shape[1])
    out = np.empty((x.shape[0] + 1, x.shape[1]))
    out[0] = pi
    for t, f in enumerate(x):
        out[t + 1] = drifted_allocation(out[t], f)
    return out


def eg_allocate(rel, eta=0.05):
    """Multiplicative updates ``pi_k <- pi_k exp(eta f_k / <pi, f>)``."""
    if not eta > 0:
        raise InvalidArgumentError(f"eta must be positive, got {eta}")
    x = _relatives(rel)
    T, K = x.shape
    out = np.empty((T + 1, K))
    out[0] = uniform(K)
    for t, f in enumerate(x):
        pi = out[t]
        g = eta * f / (pi @ f)
        w = pi * np.exp(g - g.max())
        out[t + 1] = w / w.sum()
    return out


def simplex_grid(n_assets, resolution):
    """Points of the simplex with coordinates in multiples of ``1/(resolution-1)``.

    For two assets this is ``resolution`` evenly spaced weights on [0, 1];
    for three it is the triangular lattice with ``resolution`` points per edge.
    """
    if n_assets not in (2, 3):
        raise UnsupportedDimensionError(f"grid strategies support 2 or 3 assets, got {n_assets}")
    if int(resolution) != resolution or resolution < 2:
        raise InvalidArgumentError(f"grid resolution must be an integer >= 2, got {resolution}")
    n = int(resolution) - 1
    if n_assets == 2:
        w = np.arange(n + 1) / n
        return np.column_stack([w, 1.0 - w])
    pts = [(i, j, n - i - j) for i, j in itertools.product(range(n + 1), repeat=2) if i + j <= n]
    return np.array(pts, dtype=float) / n


def _prior_weights(grid, prior):
    if prior == "uniform":
        return np.ones(len(grid))
    if prior == "dirichlet":
        # Dirichlet(1/2, ..., 1/2) density; vertices are pulled in by half a
        # grid step to keep the integrable singularity finite.
        step = np.min(grid[grid > 0])
        return np.prod(np.maximum(grid, 0.5 * step) ** -0.5, axis=1)
    raise InvalidArgumentError(f"unknown prior {prior!r}; expected 'uniform' or 'dirichlet'")


def crp_log_wealths(rel, grid):
    """Final log-wealth (no fees) of every CRP in ``grid``."""
    x = _relatives(rel)
    return np.log(x @ grid.T).sum(axis=0)


def best_crp_hindsight(rel, resolution=1001):
    """Grid argmax of final CRP wealth; returns ``(allocation, wealth)``."""
    x = _relatives(rel)
    grid = simplex_grid(x.shape[1], resolution)
    logw = crp_log_wealths(x, grid)
    i = int(np.argmax(logw))
    return as_allocation(grid[i]), float(np.exp(logw[i]))


def universal_allocate(rel, resolution=1000, prior="uniform"):
    """Cover's universal portfolio discretized on a simplex grid.

    Each target is the average of the grid CRPs weighted by prior times the
    wealth each CRP has accumulated so far. Weights are kept in log space and
    updated incrementally, one grid pass per step.
    """
    x = _relatives(rel)
    T, K = x.shape
    grid = simplex_grid(K, resolution)
    logw = np.log(_prior_weights(grid, prior))
    out = np.empty((T + 1, K))
    for t in range(T + 1):
        w = np.exp(logw - logw.max())
        out[t] = w @ grid / w.sum()
        if t < T:
            logw += np.log(grid @ x[t])
    return out
