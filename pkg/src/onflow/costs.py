"""Proportional transaction fees: exact accounting and the smoothed penalty."""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .simplex import jacobian_apply, softmax

DEFAULT_SMOOTHING = 1e-6


@dataclass(frozen=True)
class FeeSchedule:
    """Fee rate ``xi`` charged on the L1 size of each rebalance.

    ``a`` is the pseudo-Huber smoothing width used only inside the
    optimization penalty, never in wealth accounting.
    """

    xi: float = 0.0
    a: float = DEFAULT_SMOOTHING

    def __post_init__(self):
        if not 0.0 <= self.xi < 0.5:
            raise InvalidArgumentError(f"fee rate must lie in [0, 0.5), got {self.xi}")
        if not self.a > 0:
            raise InvalidArgumentError(f"smoothing parameter must be positive, got {self.a}")


def drifted_allocation(pi, f):
    """Weights after one period of price moves, before any trade."""
    pi = np.asarray(pi, dtype=float)
    f = np.asarray(f, dtype=float)
    if f.shape != pi.shape:
        raise InvalidArgumentError(f"dimension mismatch: pi {pi.shape}, f {f.shape}")
    if not np.all(f > 0):
        raise InvalidArgumentError("price relatives must be strictly positive")
    grown = pi * f
    return grown / grown.sum()


def huber_abs(x, a):
    """Smooth absolute value ``sqrt(x^2 + a^2) - a``."""
    return np.sqrt(np.square(x) + a * a) - a


def transaction_loss(H, pi_plus, fees):
    if fees.xi == 0:
        return 0.0
    x = softmax(H) - np.asarray(pi_plus, dtype=float)
    return float(fees.xi * huber_abs(x, fees.a).sum())


def transaction_loss_grad(H, pi_plus, fees):
    """Gradient of :func:`transaction_loss` with respect to the logits."""
    pi = softmax(H)
    if fees.xi == 0:
        return np.zeros_like(pi)
    return _penalty_grad(pi, pi_plus, fees)


def _penalty_grad(pi, pi_plus, fees):
    x = pi - pi_plus
    return fees.xi * jacobian_apply(pi, x / np.sqrt(x * x + fees.a * fees.a))


def rebalance_factor(pi_from, pi_to, xi):
    """Multiplicative wealth factor ``1 - xi * ||pi_from - pi_to||_1``."""
    if not 0.0 <= xi < 0.5:
        raise InvalidArgumentError(f"fee rate must lie in [0, 0.5), got {xi}")
    if xi == 0:
        return 1.0
    return 1.0 - xi * float(np.abs(np.asarray(pi_from) - np.asarray(pi_to)).sum())
