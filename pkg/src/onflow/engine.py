"""Online gradient-flow allocation.

At every trading step the logits ``H`` follow, for a numerical time ``tau``,
the ascent flow of ``ln<softmax(H), f_t>`` minus a smoothed fee penalty that
pulls the new allocation towards the overnight-drifted one. The new
allocation is ``softmax(H)`` at the end of the flow.
"""

from dataclasses import dataclass, field

import numpy as np

from .costs import FeeSchedule, _penalty_grad, drifted_allocation
from .data import PriceRelativeSeries
from .exceptions import DivergenceError, InvalidArgumentError
from .simplex import as_logits, softmax

METHODS = ("rk4", "euler")
LOGIT_LIMIT = 1e3


@dataclass(frozen=True)
class OnflowConfig:
    tau: float = 0.05
    fees: FeeSchedule = field(default_factory=FeeSchedule)
    substeps: int = 10
    method: str = "rk4"
    batch: int = 1

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidArgumentError(f"tau must be positive, got {self.tau}")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise InvalidArgumentError(f"substeps must be a positive integer, got {self.substeps}")
        if self.method not in METHODS:
            raise InvalidArgumentError(f"method must be one of {METHODS}, got {self.method!r}")
        if int(self.batch) != self.batch or self.batch < 1:
            raise InvalidArgumentError(f"batch must be a positive integer, got {self.batch}")


@dataclass(frozen=True)
class OnflowState:
    logits: np.ndarray
    step: int = 1

    @classmethod
    def initial(cls, n_assets):
        return cls(np.zeros(n_assets), 1)

    @property
    def allocation(self):
        return softmax(self.logits)


def _positive(f, n):
    f = np.asarray(f, dtype=float)
    if f.shape != (n,):
        raise InvalidArgumentError(f"expected {n} price relatives, got shape {f.shape}")
    if not np.all(f > 0):
        raise InvalidArgumentError("price relatives must be strictly positive")
    return f


def reward_log_return(H, f):
    pi = softmax(H)
    f = _positive(f, pi.size)
    return float(np.log(pi @ f))


def _rhs(H, fs, pi_plus, fees):
    # fs is a (B, K) block; the reward gradient is averaged over its rows
    pi = np.exp(H - H.max())
    pi /= pi.sum()
    growth = fs @ pi
    g = (pi * fs / growth[:, None]).mean(axis=0) - pi
    if fees.xi:
        g -= _penalty_grad(pi, pi_plus, fees)
    return g


def onflow_rhs(H, f, pi_plus, fees):
    """Logit-space gradient of the step reward minus the fee penalty."""
    H = as_logits(H)
    f = _positive(f, H.size)
    pi_plus = np.asarray(pi_plus, dtype=float)
    if pi_plus.shape != H.shape:
        raise InvalidArgumentError(f"dimension mismatch: H {H.shape}, pi_plus {pi_plus.shape}")
    return _rhs(H, f[None, :], pi_plus, fees)


def _flow(H, fs, pi_plus, config):
    h = config.tau / config.substeps
    fees = config.fees
    if config.method == "euler":
        for _ in range(config.substeps):
            H = H + h * _rhs(H, fs, pi_plus, fees)
        return H
    for _ in range(config.substeps):
        k1 = _rhs(H, fs, pi_plus, fees)
        k2 = _rhs(H + 0.5 * h * k1, fs, pi_plus, fees)
        k3 = _rhs(H + 0.5 * h * k2, fs, pi_plus, fees)
        k4 = _rhs(H + h * k3, fs, pi_plus, fees)
        H = H + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return H


def _guard(H, step):
    if not np.all(np.isfinite(H)):
        raise DivergenceError(f"non-finite logits at trading step {step}", step=step)
    if np.abs(H).max() > LOGIT_LIMIT:
        raise DivergenceError(
            f"logits exceeded {LOGIT_LIMIT:g} in magnitude at trading step {step}", step=step
        )


def _advance(H, fs, config, step):
    pi = softmax(H)
    pi_plus = drifted_allocation(pi, fs[-1])
    H = _flow(H, fs, pi_plus, config)
    _guard(H, step)
    return H


def integrate_step(state, f, config):
    """Solve the flow over ``[0, tau]`` for one observed relative vector."""
    H = as_logits(state.logits)
    f = _positive(f, H.size)
    H = _advance(H, f[None, :], config, state.step)
    return OnflowState(H, state.step + 1)


def onflow_allocate(rel, config=None):
    """Run the online loop over a series and return ``T + 1`` allocations.

    Row ``t`` of the result is the allocation held during step ``t`` (so row
    0 is uniform) and depends only on relatives ``0 .. t-1``. With
    ``config.batch = B`` the logits move only after every ``B``-th
    observation, using the average gradient over those ``B`` relatives.
    """
    config = config or OnflowConfig()
    x = rel.relatives if isinstance(rel, PriceRelativeSeries) else np.asarray(rel, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidArgumentError(f"expected a (T, K) array of relatives with T >= 1, got {x.shape}")
    if not np.all(x > 0):
        raise InvalidArgumentError("price relatives must be strictly positive")
    T, K = x.shape
    B = config.batch
    H = np.zeros(K)
    out = np.empty((T + 1, K))
    out[0] = softmax(H)
    for t in range(T):
        if (t + 1) % B == 0:
            H = _advance(H, x[t + 1 - B:t + 1], config, t + 1)
            out[t + 1] = softmax(H)
        else:
            out[t + 1] = out[t]
    return out
