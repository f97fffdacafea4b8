"""Log-normal market laboratory.

For assets with ``dS/S = mu dt + sigma dz`` the expected log-growth rate of a
constant-mix portfolio is the quadratic ``R(pi) = <mu, pi> - pi' Sigma pi / 2``.
This module simulates such markets, finds the maximizer of ``R`` on the
simplex by enumerating the stationary points of the softmax gradient flow,
and integrates that flow to check it converges to the maximizer.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .data import PriceRelativeSeries
from .engine import LOGIT_LIMIT
from .exceptions import DivergenceError, InvalidArgumentError, NumericalError
from .simplex import as_allocation, as_logits, jacobian_apply, softmax

MAX_ENUMERATION = 20
CONDITION_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class MarketModel:
    """Drift vector ``mu`` and volatility matrix ``sigma`` with ``Sigma = sigma' sigma``."""

    mu: np.ndarray
    sigma: np.ndarray
    Sigma: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        sigma = np.array(self.sigma, dtype=float)
        if mu.ndim != 1 or sigma.shape != (mu.size, mu.size):
            raise InvalidArgumentError(f"mu {mu.shape} and sigma {sigma.shape} are incompatible")
        Sigma = sigma.T @ sigma
        Sigma = 0.5 * (Sigma + Sigma.T)
        if np.linalg.eigvalsh(Sigma)[0] <= 1e-12:
            raise InvalidArgumentError("covariance sigma' sigma is not positive definite")
        for a in (mu, sigma, Sigma):
            a.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "Sigma", Sigma)

    @classmethod
    def from_covariance(cls, mu, Sigma):
        Sigma = np.array(Sigma, dtype=float)
        if Sigma.ndim != 2 or not np.allclose(Sigma, Sigma.T, rtol=0, atol=1e-14):
            raise InvalidArgumentError("covariance must be a symmetric matrix")
        try:
            L = np.linalg.cholesky(Sigma)
        except np.linalg.LinAlgError:
            raise InvalidArgumentError("covariance is not positive definite") from None
        return cls(mu, L.T)

    @property
    def n_assets(self):
        return self.mu.size


@dataclass(frozen=True)
class CriticalPoint:
    support: tuple
    point: np.ndarray
    in_simplex: bool
    reward: float
    degenerate: bool = False


def simulate_lognormal(model, steps, dt, seed=None):
    """Exact log-normal price relatives over ``steps`` intervals of length ``dt``."""
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt}")
    if steps < 1:
        raise InvalidArgumentError(f"steps must be >= 1, got {steps}")
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((steps, model.n_assets))
    drift = (model.mu - 0.5 * np.diag(model.Sigma)) * dt
    log_rel = drift + np.sqrt(dt) * eps @ model.sigma
    names = tuple(f"asset{k + 1}" for k in range(model.n_assets))
    return PriceRelativeSeries(names, np.exp(log_rel))


def quadratic_reward(pi, model):
    pi = np.asarray(pi, dtype=float)
    if pi.shape != model.mu.shape:
        raise InvalidArgumentError(f"dimension mismatch: pi {pi.shape}, mu {model.mu.shape}")
    return float(model.mu @ pi - 0.5 * pi @ model.Sigma @ pi)


def reward_gradient(H, model):
    """Gradient of ``R(softmax(H))`` with respect to the logits."""
    pi = softmax(H)
    return jacobian_apply(pi, model.mu - model.Sigma @ pi)


def unconstrained_target(model):
    """Solve ``Sigma x = mu``: the maximizer of ``R`` with no constraints."""
    if np.linalg.cond(model.Sigma) > CONDITION_LIMIT:
        raise NumericalError("covariance is too ill-conditioned to invert reliably")
    return np.linalg.solve(model.Sigma, model.mu)


def critical_points(model):
    """Stationary points of the flow, one per nonempty support set.

    On a support ``L`` the point solves ``Sigma_LL x = mu_L + c 1`` with
    ``c`` fixed by ``sum(x) = 1``; entries off ``L`` are zero.
    """
    K = model.n_assets
    if K > MAX_ENUMERATION:
        raise InvalidArgumentError(f"support enumeration limited to {MAX_ENUMERATION} assets, got {K}")
    out = []
    for size in range(1, K + 1):
        for support in itertools.combinations(range(K), size):
            idx = list(support)
            minor = model.Sigma[np.ix_(idx, idx)]
            point = np.zeros(K)
            degenerate = np.linalg.cond(minor) > CONDITION_LIMIT
            if degenerate:
                out.append(CriticalPoint(support, np.full(K, np.nan), False, float("nan"), True))
                continue
            a = np.linalg.solve(minor, model.mu[idx])
            b = np.linalg.solve(minor, np.ones(size))
            c = (1.0 - a.sum()) / b.sum()
            point[idx] = a + c * b
            in_simplex = bool(np.all(point[idx] >= 0))
            out.append(CriticalPoint(support, point, in_simplex, quadratic_reward(point, model)))
    return out


def stationarity_residual(pi, model):
    pi = np.asarray(pi, dtype=float)
    return float(np.linalg.norm(jacobian_apply(pi, model.Sigma @ pi - model.mu)))


def optimal_allocation(model):
    """Maximizer of ``R`` over the simplex: the best feasible critical point."""
    feasible = [cp for cp in critical_points(model) if cp.in_simplex]
    best = max(feasible, key=lambda cp: cp.reward)
    return as_allocation(np.clip(best.point, 0.0, None), tol=1e-10)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    logits: np.ndarray
    allocations: np.ndarray
    rewards: np.ndarray


def _rk4(fun, y, h):
    k1 = fun(y)
    k2 = fun(y + 0.5 * h * k1)
    k3 = fun(y + 0.5 * h * k2)
    k4 = fun(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _steps(horizon, dt):
    if not horizon > 0 or not dt > 0:
        raise InvalidArgumentError("horizon and dt must be positive")
    n = int(np.ceil(horizon / dt - 1e-9))
    return n, horizon / n


def continuous_flow(model, H0, horizon, dt):
    """RK4 integration of ``dH/dt = grad_H R(softmax(H))`` from ``H0``."""
    H = as_logits(H0).copy()
    if H.size != model.n_assets:
        raise InvalidArgumentError(f"H0 has {H.size} entries for {model.n_assets} assets")
    n, h = _steps(horizon, dt)
    mu, Sigma = model.mu, model.Sigma

    def rhs(H):
        pi = np.exp(H - H.max())
        pi /= pi.sum()
        return pi * ((mu - Sigma @ pi) - pi @ (mu - Sigma @ pi))

    logits = np.empty((n + 1, H.size))
    logits[0] = H
    for i in range(n):
        H = _rk4(rhs, H, h)
        if not np.all(np.isfinite(H)) or np.abs(H).max() > LOGIT_LIMIT:
            raise DivergenceError(f"logits diverged at flow time {(i + 1) * h:g}", step=i + 1)
        logits[i + 1] = H
    e = np.exp(logits - logits.max(axis=1, keepdims=True))
    pis = e / e.sum(axis=1, keepdims=True)
    rewards = pis @ mu - 0.5 * np.einsum("ij,jk,ik->i", pis, Sigma, pis)
    return Trajectory(np.arange(n + 1) * h, logits, pis, rewards)


def allocation_flow_rhs(pi, model):
    """Right-hand side of the same flow written directly for ``pi``."""
    return jacobian_apply(pi, jacobian_apply(pi, model.mu - model.Sigma @ pi))


def allocation_flow(model, pi0, horizon, dt):
    """RK4 integration of the allocation-space form of the flow."""
    pi = np.array(pi0, dtype=float)
    n, h = _steps(horizon, dt)
    path = np.empty((n + 1, pi.size))
    path[0] = pi
    for i in range(n):
        pi = _rk4(lambda p: allocation_flow_rhs(p, model), pi, h)
        path[i + 1] = pi
    return np.arange(n + 1) * h, path


def linearized_rate(model, pi=None):
    """Slowest decay rate of the allocation flow linearized at ``pi`` (default: optimum).

    This is the smallest nonzero eigenvalue of ``h(pi)^2 Sigma`` with
    ``h(pi) = diag(pi) - pi pi'``; for an interior optimum the distance to it
    eventually shrinks like ``exp(-rate * t)``.
    """
    pi = optimal_allocation(model) if pi is None else np.asarray(pi, dtype=float)
    h = np.diag(pi) - np.outer(pi, pi)
    root = np.linalg.cholesky(model.Sigma)
    # similar to the symmetric PSD matrix L' h^2 L
    ev = np.linalg.eigvalsh(root.T @ h @ h @ root)
    ev = ev[ev > 1e-12 * ev.max()]
    return float(ev.min())


@dataclass(frozen=True)
class ConvergenceReport:
    status: str
    terminal: np.ndarray
    terminal_speed: float
    optimum: np.ndarray
    distance_to_optimum: float
    nearest_support: tuple
    distance_to_nearest: float
    interior: bool
    monotone_reward: bool
    rate: float = None
    r_squared: float = None

    def to_dict(self):
        return {
            "status": self.status,
            "terminal": self.terminal.tolist(),
            "terminal_speed": self.terminal_speed,
            "optimum": self.optimum.tolist(),
            "distance_to_optimum": self.distance_to_optimum,
            "nearest_support": [k + 1 for k in self.nearest_support],
            "distance_to_nearest": self.distance_to_nearest,
            "interior": self.interior,
            "monotone_reward": self.monotone_reward,
            "rate": self.rate,
            "r_squared": self.r_squared,
        }


def verify_convergence(trajectory, model, speed_tol=1e-10, interior_eps=1e-6,
                       fit_window=(1e-8, 1e-2), reward_tol=1e-12):
    """Summarize where a flow trajectory ended up.

    The run counts as converged when the allocation speed at the final point
    is at most ``speed_tol``. For interior limits an exponential rate is
    fitted to ``ln ||pi_t - pi*||`` over the part of the tail where that
    distance lies inside ``fit_window``.
    """
    terminal = trajectory.allocations[-1]
    speed = float(np.linalg.norm(allocation_flow_rhs(terminal, model)))
    optimum = optimal_allocation(model)
    cps = [cp for cp in critical_points(model) if not cp.degenerate]
    dists = [float(np.abs(terminal - cp.point).max()) for cp in cps]
    j = int(np.argmin(dists))
    interior = bool(np.all(terminal >= interior_eps))
    monotone = bool(np.all(np.diff(trajectory.rewards) >= -reward_tol))

    rate = r2 = None
    if interior:
        dist = np.linalg.norm(trajectory.allocations - optimum, axis=1)
        lo, hi = fit_window
        mask = (dist >= lo) & (dist <= hi)
        if mask.sum() >= 3:
            fit = stats.linregress(trajectory.times[mask], np.log(dist[mask]))
            rate, r2 = float(-fit.slope), float(fit.rvalue ** 2)
    return ConvergenceReport(
        status="converged" if speed <= speed_tol else "inconclusive",
        terminal=terminal,
        terminal_speed=speed,
        optimum=optimum,
        distance_to_optimum=float(np.abs(terminal - optimum).max()),
        nearest_support=cps[j].support,
        distance_to_nearest=dists[j],
        interior=interior,
        monotone_reward=monotone,
        rate=rate,
        r_squared=r2,
    )


def logits_of(pi):
    """Logits (mean zero) whose softmax is the interior allocation ``pi``."""
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0):
        raise InvalidArgumentError("only interior allocations have finite logits")
    H = np.log(pi)
    return H - H.mean()
