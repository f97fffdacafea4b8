"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import functools

import numpy as np
import pytest

from onflow.backtest import run_backtest
from onflow.baselines import (
    best_crp_hindsight,
    crp_log_wealths,
    eg_allocate,
    simplex_grid,
    universal_allocate,
)
from onflow.costs import FeeSchedule, drifted_allocation, transaction_loss, transaction_loss_grad
from onflow.data import PAIRS, buy_and_hold_wealth, load_nyse, relative_correlation
from onflow.engine import OnflowConfig, onflow_allocate, onflow_rhs, reward_log_return
from onflow.lognormal import (
    MarketModel,
    continuous_flow,
    linearized_rate,
    optimal_allocation,
    quadratic_reward,
    reward_gradient,
    verify_convergence,
)
from onflow.simplex import softmax

import conftest
from conftest import central_gradient, naive_wealth


def record(number, ok, detail):
    conftest.ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    assert ok, detail


@functools.lru_cache(maxsize=None)
def pair(n):
    return load_nyse().select(PAIRS[n]).relatives


@functools.lru_cache(maxsize=None)
def targets(n, strategy, xi=0.0):
    x = pair(n)
    if strategy == "up":
        return universal_allocate(x, 1000)
    if strategy == "eg":
        return eg_allocate(x, 0.05)
    tau = 0.05 if xi == 0 else 1.0
    return onflow_allocate(x, OnflowConfig(tau=tau, fees=FeeSchedule(xi)))


@functools.lru_cache(maxsize=None)
def summary(n, strategy, xi):
    return run_backtest(targets(n, strategy, xi), pair(n), xi).summary


def wealth(n, strategy, xi):
    return summary(n, strategy, xi).final_wealth


def bah(n):
    return [buy_and_hold_wealth(pair(n), k) for k in range(2)]


def within(value, target, rel):
    return abs(value - target) <= rel * target


def test_criterion_1_table_statistics():
    corr = {1: 0.064, 2: 0.041, 3: 0.388, 4: 0.067}
    perf = {1: (52.02, 4.13), 2: (8.92, 4.13), 3: (13.36, 12.21), 4: (52.02, 22.92)}
    got_corr = {n: relative_correlation(pair(n)) for n in PAIRS}
    got_perf = {n: bah(n) for n in PAIRS}
    ok = all(abs(got_corr[n] - corr[n]) <= 0.005 for n in PAIRS) and all(
        within(g, p, 0.01) for n in PAIRS for g, p in zip(got_perf[n], perf[n])
    )
    detail = "; ".join(
        f"pair {n} corr {got_corr[n]:.4f} perf {got_perf[n][0]:.2f}/{got_perf[n][1]:.2f}" for n in PAIRS
    )
    record(1, ok, detail)


def test_criterion_2_pair2_without_fees():
    up, eg, on = (wealth(2, s, 0.0) for s in ("up", "eg", "onflow"))
    ok = 30 <= up <= 50 and 55 <= eg <= 90 and 55 <= on <= 90 and on >= 0.9 * eg
    record(2, ok, f"UP {up:.2f} in [30,50], EG {eg:.2f} and Onflow {on:.2f} in [55,90], Onflow >= 0.9 EG")


def test_criterion_3_pair2_with_fees():
    up, eg, on = (wealth(2, s, 0.02) for s in ("up", "eg", "onflow"))
    best = max(bah(2))
    ok = on > best and up <= best and eg <= best
    record(3, ok, f"Onflow {on:.2f} > {best:.2f} >= UP {up:.2f}, EG {eg:.2f}")


def test_criterion_4_pair2_turnover():
    s = {k: summary(2, k, 0.02) for k in ("up", "eg", "onflow")}
    ok = (
        all(70 <= s[k].total_turnover <= 130 for k in ("up", "eg"))
        and 15 <= s["onflow"].total_turnover <= 35
        and abs(s["onflow"].mean_daily_turnover - 0.005) <= 0.002
        and all(abs(s[k].mean_daily_turnover - 0.02) <= 0.01 for k in ("up", "eg"))
    )
    detail = ", ".join(
        f"{k} total {s[k].total_turnover:.1f} daily {100 * s[k].mean_daily_turnover:.2f}%" for k in s
    )
    record(4, ok, detail)


def test_criterion_5_pair1():
    up0, eg0, on0 = (wealth(1, s, 0.0) for s in ("up", "eg", "onflow"))
    up2, eg2, on2 = (wealth(1, s, 0.02) for s in ("up", "eg", "onflow"))
    weights = targets(1, "onflow", 0.02)
    # row t is the allocation held over step t
    dominant = bool(np.all(weights[1001:, 0] > weights[1001:, 1]))
    ok = (
        within(up0, 80, 0.3) and within(eg0, 110, 0.3) and within(on0, 110, 0.3)
        and within(up2, 15, 0.5) and within(eg2, 15, 0.5) and within(on2, 50, 0.3) and dominant
    )
    record(5, ok, f"xi=0 UP {up0:.1f} EG {eg0:.1f} Onflow {on0:.1f}; xi=2% UP {up2:.1f} EG {eg2:.1f} "
                  f"Onflow {on2:.1f}; Commercial Metals weight dominant after t=1000: {dominant}")


def test_criterion_6_pair3_with_fees():
    up, eg, on = (wealth(3, s, 0.02) for s in ("up", "eg", "onflow"))
    lo, hi = min(bah(3)), max(bah(3))
    ok = up < lo and eg < lo and within(on, hi, 0.2)
    record(6, ok, f"UP {up:.2f}, EG {eg:.2f} < {lo:.2f}; Onflow {on:.2f} within 20% of {hi:.2f}")


def interior_model(rng, K):
    A = rng.normal(size=(K, K)) / np.sqrt(K)
    Sigma = A.T @ A + 0.2 * np.eye(K)
    # optimum placed strictly inside the simplex by construction
    target = 0.5 * rng.dirichlet(4 * np.ones(K)) + 0.5 / K
    return MarketModel.from_covariance(Sigma @ target + rng.normal(), Sigma), target


def test_criterion_7_lognormal_convergence():
    rng = np.random.default_rng(2024)
    worst_dist, worst_r2, all_monotone = 0.0, 1.0, True
    for i in range(20):
        K = [2, 3, 5][i % 3]
        model, target = interior_model(rng, K)
        pi_star = optimal_allocation(model)
        assert np.abs(pi_star - target).max() <= 1e-10
        horizon = 40 / linearized_rate(model)
        traj = continuous_flow(model, rng.normal(0, 1, K), horizon, min(0.25, horizon / 1e4))
        report = verify_convergence(traj, model)
        worst_dist = max(worst_dist, float(np.abs(traj.allocations[-1] - pi_star).max()))
        all_monotone &= bool(np.all(np.diff(traj.rewards) >= -1e-12))
        worst_r2 = min(worst_r2, report.r_squared if report.r_squared is not None else 0.0)
    ok = worst_dist <= 1e-5 and all_monotone and worst_r2 >= 0.99
    record(7, ok, f"20 models: max L-inf gap {worst_dist:.2e}, monotone {all_monotone}, min R^2 {worst_r2:.4f}")


def test_criterion_8_gradient_oracles():
    rng = np.random.default_rng(8)
    worst = {"onflow_rhs": 0.0, "transaction_loss_grad": 0.0, "reward_gradient": 0.0}

    def err(g, fd):
        return float(np.linalg.norm(g - fd) / np.linalg.norm(g))

    for _ in range(100):
        K = int(rng.integers(2, 6))
        H = rng.normal(size=K)
        f = np.exp(rng.normal(0, 0.1, K))
        pp = drifted_allocation(rng.dirichlet(np.ones(K)), f)
        fees = FeeSchedule(0.02)
        g = onflow_rhs(H, f, pp, fees)
        fd = central_gradient(lambda x: reward_log_return(x, f) - transaction_loss(x, pp, fees), H)
        worst["onflow_rhs"] = max(worst["onflow_rhs"], err(g, fd))

        g = transaction_loss_grad(H, pp, fees)
        fd = central_gradient(lambda x: transaction_loss(x, pp, fees), H)
        worst["transaction_loss_grad"] = max(worst["transaction_loss_grad"], err(g, fd))

        A = rng.normal(size=(K, K))
        model = MarketModel.from_covariance(rng.normal(0, 0.3, K), A.T @ A / K + 0.1 * np.eye(K))
        g = reward_gradient(H, model)
        fd = central_gradient(lambda x: quadratic_reward(softmax(x), model), H)
        worst["reward_gradient"] = max(worst["reward_gradient"], err(g, fd))
    ok = all(v <= 1e-5 for v in worst.values())
    record(8, ok, ", ".join(f"{k} max rel err {v:.1e}" for k, v in worst.items()))


def test_criterion_9_accounting_oracle():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(50):
        K = int(rng.integers(1, 4))
        T = int(rng.integers(1, 21))
        rel = np.exp(rng.normal(0, 0.2, size=(T, K)))
        tg = rng.dirichlet(np.ones(K), size=T + 1)
        xi = float(rng.choice([0.0, 0.01, 0.02]))
        expected, _ = naive_wealth(tg.tolist(), rel.tolist(), xi)
        got = run_backtest(tg, rel, xi).wealth
        worst = max(worst, float(np.max(np.abs(got / expected - 1))))
    record(9, worst <= 1e-10, f"50 instances, max relative wealth error {worst:.1e}")


def test_criterion_10_universal_identity():
    grid = simplex_grid(2, 1000)
    gaps, dominance = [], []
    for n in PAIRS:
        up = wealth(n, "up", 0.0)
        average = float(np.mean(np.exp(crp_log_wealths(pair(n), grid))))
        gaps.append(abs(up / average - 1))
        _, best = best_crp_hindsight(pair(n), 1000)
        dominance.append(best >= up)
    ok = max(gaps) <= 1e-10 and all(dominance)
    record(10, ok, f"max |UP / grid average - 1| {max(gaps):.1e}; best CRP >= UP on pairs {list(PAIRS)}: "
                   f"{all(dominance)}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
