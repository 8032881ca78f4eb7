import io

import numpy as np
import pytest

from dpmix import cli
from dpmix.errors import ConfigError
from dpmix.experiments import (
    CSV_HEADER,
    DataModel,
    ExperimentConfig,
    format_data,
    read_config_file,
    read_data,
    rows_to_csv,
    simulate_data,
    trend_experiment,
)
from dpmix.gibbs import ChainConfig

SMALL_CHAIN = ChainConfig(n_sweeps=400, burn_in=100, thin=1, n_chains=2)


class TestSimulate:
    def test_deterministic(self):
        a = simulate_data(DataModel(), 50, np.random.default_rng(1))
        b = simulate_data(DataModel(), 50, np.random.default_rng(1))
        assert np.array_equal(a, b)

    def test_large_sample_mean(self):
        xs = simulate_data(DataModel(), 10 ** 6, np.random.default_rng(2))
        assert abs(xs.mean()) < 0.004

    def test_degenerate_mixture_distribution(self):
        rng = np.random.default_rng(3)
        xs = simulate_data(DataModel("gaussian-mixture", (1.0,), (0.0,)), 200_000, rng)
        assert abs(xs.mean()) < 0.01 and abs(xs.std() - 1) < 0.01

    def test_mixture_means(self):
        xs = simulate_data(DataModel("gaussian-mixture", (0.25, 0.75), (-4.0, 4.0)), 100_000,
                           np.random.default_rng(4))
        assert abs((xs < 0).mean() - 0.25) < 0.01

    @pytest.mark.parametrize("weights,means", [((0.5, 0.4), (0.0, 1.0)), ((1.0,), ()), ((), ())])
    def test_bad_mixture(self, weights, means):
        with pytest.raises(ConfigError):
            DataModel("gaussian-mixture", weights, means)


class TestConfig:
    def test_grid_must_increase(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(n_grid=(10, 10))

    def test_auto_engine(self):
        cfg = ExperimentConfig(n_grid=(5, 13, 14))
        assert [cfg.engine_for(n) for n in cfg.n_grid] == ["exact", "exact", "gibbs"]
        assert ExperimentConfig(n_grid=(5,), cap=4).engine_for(5) == "gibbs"

    def test_exact_above_cap(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(n_grid=(20,), engine="exact")

    def test_from_file(self, tmp_path):
        path = tmp_path / "trend.cfg"
        path.write_text("# comment\nn-grid = 3, 5\nreplicates = 2\nseed = 9  # trailing\n"
                        "engine = gibbs\nsweeps = 400\nburn_in = 100\nthin = 1\nchains = 2\n",
                        encoding="utf-8")
        cfg = ExperimentConfig.from_mapping(read_config_file(path))
        assert cfg.n_grid == (3, 5) and cfg.replicates == 2 and cfg.seed == 9
        assert cfg.chain == ChainConfig(400, 100, 1, 0, 2)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown"):
            ExperimentConfig.from_mapping({"bogus": "1"})

    def test_invalid_chain_for_gibbs(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({"engine": "gibbs", "sweeps": "10", "burn-in": "20"})


class TestTrend:
    def test_n1_exact(self):
        rows = trend_experiment(ExperimentConfig(n_grid=(1,), replicates=4, engine="exact"))
        assert len(rows) == 4
        assert all(r.p_t1 == 1.0 and r.t_mode == 1 and r.mc_se == 0.0 for r in rows)

    def test_row_count_and_order(self):
        cfg = ExperimentConfig(n_grid=(2, 4, 30), replicates=3, chain=SMALL_CHAIN, seed=5)
        rows = trend_experiment(cfg)
        assert len(rows) == 9
        assert [(r.n, r.replicate) for r in rows] == [(n, i) for n in (2, 4, 30) for i in range(3)]
        assert [r.engine for r in rows] == ["exact"] * 6 + ["gibbs"] * 3
        for r in rows:
            assert 0 <= r.p_t1 <= 1 and 0 <= r.p_t2 <= 1 and r.p_t1 + r.p_t2 <= 1 + 1e-9

    def test_auto_equals_exact_below_cap(self):
        base = dict(n_grid=(3, 6), replicates=2, seed=11)
        a = trend_experiment(ExperimentConfig(engine="auto", **base))
        b = trend_experiment(ExperimentConfig(engine="exact", **base))
        assert a == b

    def test_rows_independent_of_grid(self):
        a = trend_experiment(ExperimentConfig(n_grid=(4,), replicates=3, seed=1))
        b = trend_experiment(ExperimentConfig(n_grid=(2, 4), replicates=3, seed=1))
        assert a == [r for r in b if r.n == 4]

    def test_csv_deterministic_and_header(self):
        cfg = ExperimentConfig(n_grid=(3, 25), replicates=2, chain=SMALL_CHAIN, seed=3)
        a = rows_to_csv(trend_experiment(cfg))
        b = rows_to_csv(trend_experiment(cfg))
        assert a == b
        assert a.splitlines()[0] == "n,replicate,seed,engine,p_t1,p_t2,t_mode,xbar,mc_se"
        assert ",".join(CSV_HEADER) == a.splitlines()[0]


class TestDataFiles:
    def test_roundtrip(self, tmp_path):
        xs = np.random.default_rng(0).standard_normal(20) * 1e-6
        path = tmp_path / "d.txt"
        path.write_text(format_data(xs) + "\n\n", encoding="utf-8")
        assert "e" not in path.read_text()
        np.testing.assert_array_equal(read_data(path), xs)

    def test_bad_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            read_data("1.0\nabc\n", is_text=True)

    def test_empty(self):
        with pytest.raises(ConfigError):
            read_data("\n\n", is_text=True)


def run_cli(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


class TestCli:
    @pytest.fixture
    def data(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("0.5\n-1.25\n\n2.0\n0.1\n", encoding="utf-8")
        return str(path)

    def test_prior_t(self):
        code, out = run_cli("prior-t", "--n", "3", "--alpha", "1")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "t,prob"
        np.testing.assert_allclose([float(l.split(",")[1]) for l in lines[1:]], [1 / 3, 1 / 2, 1 / 6])

    def test_exact(self, data):
        code, out = run_cli("exact", "--data", data, "--alpha", "1")
        probs = [float(l.split(",")[2]) for l in out.splitlines()[1:]]
        assert code == 0 and len(probs) == 4 and abs(sum(probs) - 1) < 1e-12

    def test_exact_cap_error(self, tmp_path, capsys):
        path = tmp_path / "big.txt"
        path.write_text("0\n" * 14, encoding="utf-8")
        code, _ = run_cli("exact", "--data", str(path))
        assert code == 2
        assert "cap" in capsys.readouterr().err

    def test_gibbs(self, data):
        code, out = run_cli("gibbs", "--data", data, "--sweeps", "2000", "--burn-in", "500",
                            "--thin", "1", "--seed", "4")
        assert code == 0 and out.splitlines()[0] == "t,prob,se"
        assert out == run_cli("gibbs", "--data", data, "--sweeps", "2000", "--burn-in", "500",
                              "--thin", "1", "--seed", "4")[1]

    @pytest.mark.parametrize("check", ["eq5", "ratio", "ustat", "r2bound"])
    def test_diagnostics(self, data, check):
        code, out = run_cli("diagnostics", "--data", data, "--check", check)
        assert code == 0
        assert all(l.startswith(check) for l in out.splitlines()[1:])
        assert "False" not in out or check == "ustat"

    def test_mfm_paths(self, data):
        a = run_cli("mfm", "--data", data, "--smax", "3", "--gamma", "1", "--prior-s", "geometric")[1]
        b = run_cli("mfm", "--data", data, "--smax", "3", "--path", "assignments")[1]
        pa = [float(l.split(",")[2]) for l in a.splitlines()[1:]]
        pb = [float(l.split(",")[2]) for l in b.splitlines()[1:]]
        np.testing.assert_allclose(pa, pb, atol=1e-12)

    def test_simulate_stdin_roundtrip(self, monkeypatch):
        _, text = run_cli("simulate", "--n", "6", "--seed", "2")
        assert len(text.splitlines()) == 6
        monkeypatch.setattr("sys.stdin", io.StringIO(text))
        code, out = run_cli("exact", "--data", "-")
        assert code == 0 and len(out.splitlines()) == 7

    def test_trend(self, tmp_path):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("n-grid = 2,3\nreplicates = 2\nseed = 1\n", encoding="utf-8")
        out_path = tmp_path / "o.csv"
        assert run_cli("trend", "--config", str(cfg), "--out", str(out_path))[0] == 0
        text = out_path.read_text(encoding="utf-8")
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        assert len(text.splitlines()) == 5
        assert run_cli("trend", "--config", str(cfg))[1] == text

    def test_trend_flags_override_config(self, tmp_path):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("n-grid = 2,3\nreplicates = 5\n", encoding="utf-8")
        _, out = run_cli("trend", "--config", str(cfg), "--replicates", "1", "--n-grid", "4")
        assert [l.split(",")[:2] for l in out.splitlines()[1:]] == [["4", "0"]]
        assert run_cli("trend", "--n-grid", "3", "--engine", "nope")[0] == 2
