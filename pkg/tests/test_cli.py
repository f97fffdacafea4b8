import csv
import json

import numpy as np
import pytest

from onflow.cli import main

COV = "0.04,0.01;0.01,0.09"


@pytest.fixture
def small_prices(tmp_path):
    rng = np.random.default_rng(4)
    prices = np.cumprod(np.exp(rng.normal(0, 0.03, size=(60, 2))), axis=0)
    path = tmp_path / "prices.csv"
    np.savetxt(path, prices, delimiter=",", header="alpha,beta", comments="", fmt="%.17g")
    return path


def read_json(path):
    return json.loads(path.read_text())


@pytest.mark.parametrize(
    "pair, corr, perf",
    [(1, 0.064, (52.02, 4.13)), (3, 0.388, (13.36, 12.21))],
)
def test_stats_pairs(tmp_path, capsys, pair, corr, perf):
    out = tmp_path / "stats.json"
    assert main(["stats", "--pair", str(pair), "--json", str(out)]) == 0
    row = read_json(out)
    assert row["steps"] == 5651
    assert row["correlation"] == pytest.approx(corr, abs=0.005)
    np.testing.assert_allclose(row["performance"], perf, rtol=0.01)
    assert "correlation" in capsys.readouterr().out


def test_stats_constant_file_fails_cleanly(tmp_path, capsys):
    path = tmp_path / "flat.csv"
    path.write_text("a,b\n" + "1,2\n" * 10)
    assert main(["stats", "--data", str(path)]) == 2
    err = capsys.readouterr().err
    assert "data error" in err and "Traceback" not in err


def test_missing_file_is_data_error(tmp_path):
    assert main(["stats", "--data", str(tmp_path / "none.csv")]) == 2


def test_unknown_asset_and_pair(capsys):
    assert main(["stats", "--assets", "zzz,kinar"]) == 2
    assert main(["stats", "--pair", "9"]) == 1


def test_compare_writes_csv_and_json(tmp_path, small_prices):
    out, js = tmp_path / "paths.csv", tmp_path / "summary.json"
    code = main(["compare", "--data", str(small_prices), "--fee", "0.02",
                 "--strategy", "up:grid=50", "--strategy", "eg", "--strategy", "onflow",
                 "--strategy", "bah:asset=1", "--out", str(out), "--json", str(js)])
    assert code == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["t", "strategy", "wealth", "turnover_cum", "pi_1", "pi_2"]
    assert len(rows) == 4 * 60
    assert {r["strategy"] for r in rows} == {"up:grid=50", "eg", "onflow", "bah:asset=1"}
    assert all(float(r["turnover_cum"]) == 0.0 for r in rows if r["t"] == "0")
    summary = read_json(js)
    assert summary["fee"] == 0.02 and summary["steps"] == 59
    onflow = summary["strategies"]["onflow"]
    assert onflow["params"]["tau"] == 1.0
    assert summary["strategies"]["bah:asset=1"]["total_turnover"] == 0.0
    last = [r for r in rows if r["strategy"] == "eg"][-1]
    assert float(last["wealth"]) == pytest.approx(summary["strategies"]["eg"]["final_wealth"], rel=1e-15)


def test_compare_usage_errors(small_prices):
    assert main(["compare", "--data", str(small_prices)]) == 1
    assert main(["compare", "--data", str(small_prices), "--strategy", "foo"]) == 1
    assert main(["backtest", "--data", str(small_prices), "--strategy", "eg", "--strategy", "up"]) == 1
    assert main(["compare", "--data", str(small_prices), "--strategy", "eg", "--strategy", "eg"]) == 1
    assert main(["compare", "--data", str(small_prices), "--fee", "0.7", "--strategy", "eg"]) == 1


def test_divergence_is_reported_per_strategy(tmp_path, small_prices):
    js = tmp_path / "s.json"
    code = main(["compare", "--data", str(small_prices), "--strategy", "eg",
                 "--strategy", "onflow:tau=10000000,substeps=1,method=euler", "--json", str(js)])
    assert code == 3
    summary = read_json(js)["strategies"]
    assert "final_wealth" in summary["eg"]
    assert "error" in summary["onflow:tau=10000000,substeps=1,method=euler"]


def test_backtest_single_strategy(tmp_path, small_prices):
    js = tmp_path / "s.json"
    assert main(["backtest", "--data", str(small_prices), "--strategy", "crp:w=0.5/0.5", "--json", str(js)]) == 0
    assert list(read_json(js)["strategies"]) == ["crp:w=0.5/0.5"]


def converge(tmp_path, *args):
    js = tmp_path / "verdict.json"
    out = tmp_path / "traj.csv"
    assert main(["converge", *args, "--json", str(js), "--out", str(out), "--every", "100"]) == 0
    return read_json(js), out


def test_converge_symmetric(tmp_path):
    verdict, out = converge(tmp_path, "--mu", "1,1", "--cov", "1,0;0,1", "--h0", "1,-1", "--horizon", "200")
    assert verdict["status"] == "converged" and verdict["monotone_reward"]
    np.testing.assert_allclose(verdict["terminal"], [0.5, 0.5], atol=1e-8)
    header = out.read_text().splitlines()[0]
    assert header == "t,pi_1,pi_2,reward,dist_to_opt"


def test_converge_interior(tmp_path):
    verdict, _ = converge(tmp_path, "--mu", "0.08,0.07", "--cov", COV, "--horizon", "4000", "--dt", "1")
    assert verdict["status"] == "converged" and verdict["interior"]
    np.testing.assert_allclose(verdict["terminal"], verdict["optimum"], atol=1e-6)
    assert verdict["r_squared"] >= 0.99


def test_converge_boundary(tmp_path):
    verdict, _ = converge(tmp_path, "--mu", "0.5,0", "--cov", "0.01,0;0,0.01", "--horizon", "20000", "--dt", "1")
    # the distance decays like 1/t, so the terminal point is close to e_1 but not on it
    assert verdict["nearest_support"] == [1]
    assert verdict["terminal"][0] > 0.999
    np.testing.assert_array_equal(verdict["optimum"], [1.0, 0.0])


def test_converge_rejects_non_spd(capsys):
    assert main(["converge", "--mu", "0.1,0.1", "--cov", "1,2;2,1"]) == 1
    assert "positive definite" in capsys.readouterr().err
    assert main(["converge", "--mu", "0.1,0.1"]) == 1
    assert main(["converge", "--mu", "0.1,x", "--cov", "1,0;0,1"]) == 1


def test_simulate_concentrates_on_dominant_asset(tmp_path):
    js = tmp_path / "sim.json"
    code = main(["simulate", "--mu", "0.05,0.0", "--sigma", "1e-5,0;0,1e-5", "--steps", "2000",
                 "--tau", "1", "--json", str(js)])
    assert code == 0
    payload = read_json(js)
    assert payload["tail_mean_allocation"][0] > 0.99
    assert payload["optimal_allocation"] == [1.0, 0.0]


def test_simulate_is_deterministic(tmp_path):
    outputs = []
    for run in ("a", "b"):
        out, js = tmp_path / f"{run}.csv", tmp_path / f"{run}.json"
        main(["simulate", "--mu", "0.08,0.07", "--cov", COV, "--steps", "500", "--seed", "11",
              "--out", str(out), "--json", str(js)])
        outputs.append((out.read_bytes(), js.read_bytes()))
    assert outputs[0] == outputs[1]


def test_no_command_and_bad_flag():
    assert main([]) == 1
    assert main(["compare", "--nonsense"]) == 1
    assert main(["--version"]) == 0
