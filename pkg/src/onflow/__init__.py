"""Online portfolio allocation by softmax-parametrized gradient flows."""

__version__ = "0.1.0"

from .backtest import BacktestResult, Summary, run_backtest, summarize
from .baselines import (
    best_crp_hindsight,
    buy_and_hold_allocate,
    crp_allocate,
    eg_allocate,
    simplex_grid,
    universal_allocate,
)
from .costs import FeeSchedule, drifted_allocation, rebalance_factor, transaction_loss, transaction_loss_grad
from .data import PAIRS, PriceRelativeSeries, PriceSeries, load_nyse, load_relatives
from .engine import OnflowConfig, OnflowState, integrate_step, onflow_allocate, onflow_rhs
from .estimators import (
    BestConstantRebalanced,
    BuyAndHold,
    ConstantRebalancedPortfolio,
    EGPortfolio,
    OnflowPortfolio,
    UniversalPortfolio,
)
from .simplex import jacobian_apply, softmax
