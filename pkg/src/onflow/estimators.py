"""scikit-learn style wrappers around the allocation strategies.

``fit(X)`` runs a strategy online over a ``(T, K)`` array (or DataFrame) of
price relatives and stores the ``(T + 1, K)`` target path in
``allocations_``. ``predict(X)`` returns the allocation held on each row of
``X`` and ``score(X)`` the log-wealth after fees.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .backtest import run_backtest
from .baselines import (
    best_crp_hindsight,
    buy_and_hold_allocate,
    crp_allocate,
    eg_allocate,
    universal_allocate,
)
from .costs import DEFAULT_SMOOTHING, FeeSchedule
from .data import PriceRelativeSeries
from .engine import OnflowConfig, onflow_allocate
from .exceptions import InvalidArgumentError
from .simplex import uniform


def check_relatives(X):
    """Validate price relatives: 2-D, finite, strictly positive, at least one row."""
    if isinstance(X, PriceRelativeSeries):
        X = X.relatives
    X = check_array(X, dtype=np.float64, ensure_min_samples=1)
    if not np.all(X > 0):
        raise InvalidArgumentError("price relatives must be strictly positive")
    return X


class OnlinePortfolio(BaseEstimator):
    """Shared fit/predict/score plumbing; subclasses implement ``_allocate``."""

    #: fee rate used by ``score``; Onflow overrides it with its own ``xi``
    score_fee = 0.0

    def _allocate(self, X):
        raise NotImplementedError

    def fit(self, X, y=None):
        if hasattr(X, "columns"):
            self.feature_names_in_ = np.asarray(X.columns, dtype=object)
        X = check_relatives(X)
        self.n_features_in_ = X.shape[1]
        self.allocations_ = self._allocate(X)
        self.next_allocation_ = self.allocations_[-1]
        return self

    def predict(self, X):
        """Allocation held during each row of ``X`` when run online over ``X``."""
        check_is_fitted(self)
        X = check_relatives(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidArgumentError(f"X has {X.shape[1]} assets, fitted on {self.n_features_in_}")
        return self._allocate(X)[:-1]

    def backtest(self, X, xi=None):
        X = check_relatives(X)
        xi = self._score_fee() if xi is None else xi
        return run_backtest(self._allocate(X), X, FeeSchedule(xi=xi))

    def score(self, X, y=None):
        return self.backtest(X).summary.log_wealth

    def _score_fee(self):
        return self.score_fee


class OnflowPortfolio(OnlinePortfolio):
    """Gradient-flow allocation with a smoothed transaction-cost penalty.

    Parameters
    ----------
    tau : float
        Numerical flow time per trading step.
    xi : float
        Proportional fee rate the flow penalizes (and ``score`` charges).
    a : float
        Pseudo-Huber smoothing width of the penalty.
    substeps : int
        Integrator steps per trading step.
    method : {"rk4", "euler"}
    batch : int
        Observations averaged per update; logits move every ``batch`` rows.
    """

    def __init__(self, tau=0.05, xi=0.0, a=DEFAULT_SMOOTHING, substeps=10, method="rk4", batch=1):
        self.tau = tau
        self.xi = xi
        self.a = a
        self.substeps = substeps
        self.method = method
        self.batch = batch

    def config(self):
        return OnflowConfig(
            tau=self.tau,
            fees=FeeSchedule(xi=self.xi, a=self.a),
            substeps=self.substeps,
            method=self.method,
            batch=self.batch,
        )

    def _allocate(self, X):
        return onflow_allocate(X, self.config())

    def _score_fee(self):
        return self.xi


class EGPortfolio(OnlinePortfolio):
    """Exponentiated-gradient multiplicative updates with learning rate ``eta``."""

    def __init__(self, eta=0.05):
        self.eta = eta

    def _allocate(self, X):
        return eg_allocate(X, self.eta)


class UniversalPortfolio(OnlinePortfolio):
    """Cover's universal portfolio on a grid of ``resolution`` points per edge."""

    def __init__(self, resolution=1000, prior="uniform"):
        self.resolution = resolution
        self.prior = prior

    def _allocate(self, X):
        return universal_allocate(X, self.resolution, self.prior)


class ConstantRebalancedPortfolio(OnlinePortfolio):
    def __init__(self, weights=None):
        self.weights = weights

    def _allocate(self, X):
        w = uniform(X.shape[1]) if self.weights is None else self.weights
        return crp_allocate(X, w)


class BuyAndHold(OnlinePortfolio):
    """Never trades. ``initial`` is an allocation or an asset index."""

    def __init__(self, initial=None):
        self.initial = initial

    def _allocate(self, X):
        K = X.shape[1]
        if self.initial is None:
            w = uniform(K)
        elif np.isscalar(self.initial):
            k = int(self.initial)
            if not 0 <= k < K:
                raise InvalidArgumentError(f"asset index {k} out of range for {K} assets")
            w = np.eye(K)[k]
        else:
            w = self.initial
        return buy_and_hold_allocate(X, w)


class BestConstantRebalanced(OnlinePortfolio):
    """CRP chosen with hindsight on the fitted data; not an online strategy."""

    def __init__(self, resolution=1001):
        self.resolution = resolution

    def fit(self, X, y=None):
        X = check_relatives(X)
        self.weights_, self.wealth_ = best_crp_hindsight(X, self.resolution)
        return super().fit(X)

    def _allocate(self, X):
        check_is_fitted(self, "weights_")
        return crp_allocate(X, self.weights_)
