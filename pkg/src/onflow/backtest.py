"""Fee-aware wealth accounting for a sequence of target allocations."""

from dataclasses import asdict, dataclass

import numpy as np

from .costs import FeeSchedule
from .data import PriceRelativeSeries
from .exceptions import InvalidArgumentError


@dataclass(frozen=True)
class Summary:
    final_wealth: float
    total_turnover: float
    mean_daily_turnover: float
    log_wealth: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class BacktestResult:
    """Paths of one strategy run.

    ``wealth`` and ``allocations`` have ``T + 1`` rows, ``drifted`` and
    ``turnover_cum`` have ``T``. Turnover is in units of portfolio value
    (1.0 means the whole portfolio changed hands once).
    """

    wealth: np.ndarray
    allocations: np.ndarray
    drifted: np.ndarray
    turnover_cum: np.ndarray
    growth: np.ndarray
    fee_factors: np.ndarray

    @property
    def summary(self):
        return summarize(self)


def run_backtest(targets, rel, fees=None):
    """Hold ``targets[t]`` over step ``t``, let it drift, then rebalance.

    Step order for ``t = 1..T``: wealth grows by ``<pi_t, f_t>``, weights
    drift to ``pi_t * f_t / <pi_t, f_t>``, and the portfolio is traded to
    ``targets[t]`` at cost ``xi`` times the L1 distance. ``targets[0]`` is
    in place before the first step at no cost.
    """
    if fees is None:
        fees = FeeSchedule()
    elif not isinstance(fees, FeeSchedule):
        fees = FeeSchedule(xi=float(fees))
    x = rel.relatives if isinstance(rel, PriceRelativeSeries) else np.asarray(rel, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if x.ndim != 2:
        raise InvalidArgumentError(f"expected a (T, K) array of relatives, got shape {x.shape}")
    T, K = x.shape
    if targets.shape != (T + 1, K):
        raise InvalidArgumentError(f"need {T + 1} targets of size {K}, got shape {targets.shape}")
    if not np.all(x > 0):
        raise InvalidArgumentError("price relatives must be strictly positive")
    if np.any(targets < 0) or np.any(np.abs(targets.sum(axis=1) - 1.0) > 1e-9):
        raise InvalidArgumentError("every target must lie on the simplex")

    held = targets[:-1]
    grown = held * x
    growth = grown.sum(axis=1)
    drifted = grown / growth[:, None]
    traded = np.abs(drifted - targets[1:]).sum(axis=1)
    fee_factors = 1.0 - fees.xi * traded
    wealth = np.concatenate([[1.0], np.cumprod(growth * fee_factors)])
    return BacktestResult(
        wealth=wealth,
        allocations=targets,
        drifted=drifted,
        turnover_cum=np.cumsum(traded),
        growth=growth,
        fee_factors=fee_factors,
    )


def summarize(result):
    T = len(result.turnover_cum)
    total = float(result.turnover_cum[-1]) if T else 0.0
    final = float(result.wealth[-1])
    return Summary(
        final_wealth=final,
        total_turnover=total,
        mean_daily_turnover=total / T if T else 0.0,
        log_wealth=float(np.log(final)),
    )
