"""Command line interface.

Subcommands: ``stats``, ``backtest``, ``compare``, ``converge``, ``simulate``.
Exit codes: 0 success, 1 usage or validation error, 2 data error,
3 numerical divergence.
"""

import argparse
import csv
import json
import sys
from importlib import resources

import numpy as np

from . import __version__
from .backtest import run_backtest
from .data import (
    ASSET_LABELS,
    PAIRS,
    buy_and_hold_wealth,
    load_relatives,
    nyse_path,
    relative_correlation,
)
from .costs import FeeSchedule
from .engine import OnflowConfig, onflow_allocate
from .exceptions import DataError, DivergenceError, InvalidArgumentError, NumericalError, OnflowError
from .lognormal import MarketModel, continuous_flow, optimal_allocation, simulate_lognormal, verify_convergence
from .strategies import default_params, parse_strategy

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _matrix(text):
    try:
        rows = [[float(v) for v in row.split(",")] for row in text.split(";") if row.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected rows like 'a,b;c,d', got {text!r}") from None
    if len({len(r) for r in rows}) != 1:
        raise argparse.ArgumentTypeError("matrix rows have different lengths")
    return np.array(rows)


def _fmt(x):
    return repr(float(x))


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _open_csv(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


# ---------------------------------------------------------------- data access

def _load_pair(args):
    if args.assets:
        names = [s.strip() for s in args.assets.split(",") if s.strip()]
    elif args.pair is not None:
        if args.pair not in PAIRS:
            raise UsageError(f"unknown pair {args.pair}; presets are {sorted(PAIRS)}")
        names = list(PAIRS[args.pair])
    else:
        names = None
    if args.data is None:
        with resources.as_file(nyse_path()) as path:
            return load_relatives(path, names, args.format or "relatives")
    return load_relatives(args.data, names, args.format or "prices")


def _label(name):
    return ASSET_LABELS.get(name.lower(), name)


# ------------------------------------------------------------------- commands

def cmd_stats(args):
    rel = _load_pair(args)
    if rel.n_assets != 2:
        raise UsageError("stats needs exactly two assets (--pair or --assets)")
    row = {
        "assets": [_label(n) for n in rel.names],
        "steps": rel.n_steps,
        "correlation": relative_correlation(rel),
        "performance": [buy_and_hold_wealth(rel, k) for k in range(2)],
    }
    print(f"assets       {row['assets'][0]} / {row['assets'][1]}")
    print(f"steps        {row['steps']}")
    print(f"correlation  {row['correlation']:.3f}")
    print(f"performance  {row['performance'][0]:.2f} / {row['performance'][1]:.2f}")
    if args.json:
        _write_json(args.json, row)
    return EXIT_OK


def _run_strategies(args, specs, rel):
    fees = FeeSchedule(xi=args.fee)
    results, summary, diverged = {}, {}, False
    for spec in specs:
        est = spec.build()
        try:
            targets = est.fit(rel.relatives).allocations_
        except NumericalError as exc:
            diverged = True
            summary[spec.name] = {"kind": spec.kind, "params": spec.params, "error": str(exc)}
            continue
        res = run_backtest(targets, rel, fees)
        results[spec.name] = res
        summary[spec.name] = {"kind": spec.kind, "params": spec.params, **res.summary.to_dict()}
    return results, summary, diverged


def _write_paths(path, results, n_assets):
    fh, close = _open_csv(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "strategy", "wealth", "turnover_cum"] + [f"pi_{k + 1}" for k in range(n_assets)])
        for name, res in results.items():
            turnover = np.concatenate([[0.0], res.turnover_cum])
            for t in range(len(res.wealth)):
                w.writerow([t, name, _fmt(res.wealth[t]), _fmt(turnover[t])]
                           + [_fmt(v) for v in res.allocations[t]])
    finally:
        if close:
            fh.close()


def cmd_compare(args, single=False):
    if not args.strategy:
        raise UsageError("at least one --strategy is required")
    if single and len(args.strategy) != 1:
        raise UsageError("backtest takes exactly one --strategy; use compare for several")
    defaults = default_params(xi=args.fee, tau=args.tau, eta=args.eta, grid=args.grid,
                              substeps=args.substeps, method=args.method, batch=args.batch)
    specs = [parse_strategy(s, defaults) for s in args.strategy]
    if len({s.name for s in specs}) != len(specs):
        raise UsageError("strategy labels must be unique; add label=... to disambiguate")
    rel = _load_pair(args)
    results, summary, diverged = _run_strategies(args, specs, rel)

    for name, row in summary.items():
        if "error" in row:
            print(f"{name:<28} ERROR {row['error']}")
        else:
            print(f"{name:<28} wealth {row['final_wealth']:12.4f}  turnover {row['total_turnover']:9.3f}")
    if args.out:
        _write_paths(args.out, results, rel.n_assets)
    if args.json:
        _write_json(args.json, {
            "assets": list(rel.names),
            "steps": rel.n_steps,
            "fee": args.fee,
            "strategies": summary,
        })
    return EXIT_DIVERGENCE if diverged else EXIT_OK


def _model(args):
    mu = np.array(args.mu)
    if args.cov is not None and args.sigma is not None:
        raise UsageError("give either --cov or --sigma, not both")
    if args.sigma is not None:
        return MarketModel(mu, args.sigma)
    if args.cov is None:
        raise UsageError("a covariance (--cov) or volatility matrix (--sigma) is required")
    return MarketModel.from_covariance(mu, args.cov)


def cmd_converge(args):
    model = _model(args)
    K = model.n_assets
    H0 = np.zeros(K) if args.h0 is None else np.array(args.h0)
    traj = continuous_flow(model, H0, args.horizon, args.dt)
    report = verify_convergence(traj, model, speed_tol=args.speed_tol)
    dist = np.abs(traj.allocations - report.optimum).max(axis=1)
    if args.out:
        fh, close = _open_csv(args.out)
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"pi_{k + 1}" for k in range(K)] + ["reward", "dist_to_opt"])
            for i in range(0, len(traj.times), args.every):
                w.writerow([_fmt(traj.times[i])] + [_fmt(v) for v in traj.allocations[i]]
                           + [_fmt(traj.rewards[i]), _fmt(dist[i])])
        finally:
            if close:
                fh.close()
    verdict = report.to_dict()
    verdict.update({"mu": model.mu.tolist(), "Sigma": model.Sigma.tolist(),
                    "H0": H0.tolist(), "horizon": args.horizon, "dt": args.dt})
    print(f"status {report.status}; terminal {np.round(report.terminal, 8).tolist()}; "
          f"optimum {np.round(report.optimum, 8).tolist()}; monotone reward {report.monotone_reward}")
    if args.json:
        _write_json(args.json, verdict)
    return EXIT_OK


def cmd_simulate(args):
    model = _model(args)
    rel = simulate_lognormal(model, args.steps, args.dt, seed=args.seed)
    tau = 0.05 if args.tau is None else args.tau
    config = OnflowConfig(tau=tau, fees=FeeSchedule(xi=args.fee), substeps=args.substeps,
                          method=args.method, batch=args.batch)
    alloc = onflow_allocate(rel, config)
    start = int(len(alloc) * (1.0 - args.tail))
    tail_mean = alloc[start:].mean(axis=0)
    optimum = optimal_allocation(model)
    if args.out:
        fh, close = _open_csv(args.out)
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"pi_{k + 1}" for k in range(model.n_assets)])
            for t in range(0, len(alloc), args.every):
                w.writerow([t] + [_fmt(v) for v in alloc[t]])
        finally:
            if close:
                fh.close()
    payload = {
        "mu": model.mu.tolist(), "Sigma": model.Sigma.tolist(),
        "steps": args.steps, "dt": args.dt, "seed": args.seed,
        "onflow": {"tau": tau, "xi": args.fee, "substeps": args.substeps,
                   "method": args.method, "batch": args.batch},
        "tail_fraction": args.tail,
        "tail_mean_allocation": tail_mean.tolist(),
        "optimal_allocation": optimum.tolist(),
        "linf_distance": float(np.abs(tail_mean - optimum).max()),
    }
    print(f"tail mean {np.round(tail_mean, 4).tolist()}  optimum {np.round(optimum, 4).tolist()}  "
          f"L-inf gap {payload['linf_distance']:.4f}")
    if args.json:
        _write_json(args.json, payload)
    return EXIT_OK


# --------------------------------------------------------------------- parser

def _data_flags(p):
    p.add_argument("--data", help="CSV file; defaults to the bundled Old NYSE relatives")
    p.add_argument("--format", choices=["prices", "relatives"],
                   help="file layout (default: prices for --data, relatives for the bundled file)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pair", type=int, help="Old NYSE preset pair 1-4")
    g.add_argument("--assets", help="comma-separated column names, e.g. iroqu,kinar")


def _strategy_flags(p):
    p.add_argument("--fee", type=float, default=0.0, help="proportional fee rate xi, e.g. 0.02")
    p.add_argument("--strategy", action="append", default=[],
                   help="NAME[:k=v,...]; names: onflow, eg, up, crp, best_crp, bah (repeatable)")
    p.add_argument("--tau", type=float, help="Onflow flow time (default 0.05 without fees, 1 with)")
    p.add_argument("--eta", type=float, default=0.05, help="EG learning rate")
    p.add_argument("--grid", type=int, default=1000, help="UP / best-CRP grid points per edge")
    _integrator_flags(p)
    p.add_argument("--out", help="long-format CSV of paths ('-' for stdout)")
    p.add_argument("--json", help="JSON summary path ('-' for stdout)")
    p.add_argument("--seed", type=int, default=0, help="accepted for interface uniformity; runs are deterministic")


def _integrator_flags(p):
    p.add_argument("--substeps", type=int, default=10)
    p.add_argument("--method", choices=["rk4", "euler"], default="rk4")
    p.add_argument("--batch", type=int, default=1)


def _model_flags(p):
    p.add_argument("--mu", type=_floats, required=True, help="drifts, e.g. 0.10,0.07")
    p.add_argument("--cov", type=_matrix, help="covariance rows, e.g. '0.04,0.01;0.01,0.09'")
    p.add_argument("--sigma", type=_matrix, help="volatility matrix rows (Sigma = sigma' sigma)")


def build_parser():
    parser = _Parser(prog="onflow", description="Online gradient-flow portfolio allocation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("stats", help="correlation and buy-and-hold performance of an asset pair")
    _data_flags(p)
    p.add_argument("--json")
    p.set_defaults(func=cmd_stats)

    for name, single in (("backtest", True), ("compare", False)):
        p = sub.add_parser(name, help="run one strategy" if single else "run several strategies side by side")
        _data_flags(p)
        _strategy_flags(p)
        p.set_defaults(func=lambda a, single=single: cmd_compare(a, single=single))

    p = sub.add_parser("converge", help="integrate the continuous flow for a log-normal model")
    _model_flags(p)
    p.add_argument("--h0", type=_floats, help="initial logits (default zeros)")
    p.add_argument("--horizon", type=float, default=500.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--speed-tol", type=float, default=1e-10)
    p.add_argument("--every", type=int, default=1, help="write every n-th trajectory row")
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("simulate", help="run Onflow on a simulated log-normal market")
    _model_flags(p)
    p.add_argument("--steps", type=int, default=20000)
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float)
    p.add_argument("--fee", type=float, default=0.0)
    _integrator_flags(p)
    p.add_argument("--tail", type=float, default=0.5, help="fraction of the path averaged")
    p.add_argument("--every", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"onflow {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"onflow {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"onflow {args.command}: diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (InvalidArgumentError, OnflowError) as exc:
        print(f"onflow {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"onflow {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
