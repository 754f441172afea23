import json
import subprocess
import sys

import pytest
import yaml

from panelar import load_report
from panelar.cli import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_IO,
    EXIT_NUMERICAL,
    EXIT_OK,
    main,
    resolve_config,
    run,
)
from panelar.errors import ConfigParse, UnknownKey


def read(path):
    return json.loads(path.read_text())


class TestResolveConfig:
    def test_defaults_and_overrides(self):
        rc = resolve_config(None, ["regime.kind=stationary", "regime.rho=0.3", "n=7"], command="mc", seed=5)
        assert rc.command == "mc"
        assert rc.parameters["regime"] == {"kind": "stationary", "rho": 0.3, "c": None, "kt_exponent": None}
        assert rc.parameters["n"] == 7
        assert rc.seed == 5

    def test_fresh_seed_recorded(self):
        rc = resolve_config(None, [], command="mc")
        assert 0 <= rc.seed < 2**64

    def test_unknown_key(self):
        with pytest.raises(UnknownKey):
            resolve_config(None, ["regime.gamma=1"], command="mc")
        with pytest.raises(UnknownKey):
            resolve_config(None, ["nn=1"], command="mc")

    def test_unknown_key_in_file(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("command: mc\nbogus: 1\n")
        with pytest.raises(UnknownKey):
            resolve_config(cfg)

    def test_bad_yaml(self, tmp_path):
        cfg = tmp_path / "c.yaml"
        cfg.write_text("command: [mc\n")
        with pytest.raises(ConfigParse):
            resolve_config(cfg)

    def test_bad_override_syntax(self):
        with pytest.raises(ConfigParse):
            resolve_config(None, ["n"], command="mc")

    def test_command_spelling(self):
        assert resolve_config(None, [], command="berry-esseen", seed=1).command == "berry_esseen"


class TestRun:
    def test_mc_defaults(self, tmp_path):
        out = tmp_path / "mc.json"
        assert run(None, [], command="mc", out=out, seed=2024) == EXIT_OK
        doc = read(out)
        assert doc["run_config"]["seed"] == 2024
        assert 1.7 <= doc["result"]["empirical_var"] <= 2.3

    def test_invalid_n_writes_nothing(self, tmp_path):
        out = tmp_path / "mc.json"
        assert run(None, ["n=0"], command="mc", out=out, seed=1) == EXIT_CONFIG
        assert not out.exists()
        assert list(tmp_path.iterdir()) == []

    def test_repeat_is_identical(self, tmp_path):
        args = dict(command="mc", seed=9)
        over = ["n=20", "t_len=30", "replications=200"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(None, over, out=a, **args) == EXIT_OK
        assert run(None, over, out=b, **args) == EXIT_OK
        da, db = read(a), read(b)
        da["result"].pop("runtime_seconds")
        db["result"].pop("runtime_seconds")
        da["run_config"].pop("out")
        db["run_config"].pop("out")
        assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)

    def test_rerun_from_embedded_config(self, tmp_path):
        first = tmp_path / "first.json"
        assert run(None, ["n=10", "t_len=20", "replications=50", "regime.kind=local_to_unity",
                          "regime.c=2"], command="mc", out=first) == EXIT_OK
        cfg = read(first)["run_config"]
        cfg.pop("out")
        cfg_path = tmp_path / "again.yaml"
        cfg_path.write_text(yaml.safe_dump({**cfg, "emit": cfg["emit"]}))
        second = tmp_path / "second.json"
        assert run(cfg_path, [], out=second) == EXIT_OK
        assert load_report(second).scaled_stats == load_report(first).scaled_stats

    def test_emit_csvs(self, tmp_path):
        out = tmp_path / "r.json"
        code = run(None, ["n=5", "t_len=10", "replications=3"], command="mc", out=out, seed=1,
                   emit=["json", "csv_stats", "csv_quantiles"])
        assert code == EXIT_OK
        assert len((tmp_path / "r_stats.csv").read_text().splitlines()) == 4
        assert len((tmp_path / "r_quantiles.csv").read_text().splitlines()) == 10

    def test_numerical_error(self, tmp_path):
        code = run(None, ["regime.kind=explosive", "regime.rho=3", "t_len=5000"],
                   command="mc", out=tmp_path / "x.json", seed=1)
        assert code == EXIT_NUMERICAL

    def test_simulate_then_infer(self, tmp_path):
        out = tmp_path / "panel.json"
        assert run(None, ["n=30", "t_len=50"], command="simulate", out=out, seed=3) == EXIT_OK
        csv_path = tmp_path / "panel_panel.csv"
        assert csv_path.read_text().splitlines()[0] == "i,t,y"
        res = tmp_path / "inf.json"
        code = run(None, [f"input.path={csv_path}"], command="infer", out=res, seed=0)
        assert code == EXIT_OK
        result = read(res)["result"]
        assert result["regime_assumed"] == "unit_root"
        assert 0 <= result["p_value"] <= 1

    def test_infer_all_regimes(self, tmp_path):
        out = tmp_path / "panel.json"
        run(None, ["n=30", "t_len=50", "regime.kind=stationary", "regime.rho=0.5"],
            command="simulate", out=out, seed=3)
        res = tmp_path / "inf.json"
        code = run(None, [f"input.path={tmp_path / 'panel_panel.csv'}", "all_regimes=true",
                          "regime.c=1", "regime.kt_exponent=0.5"],
                   command="infer", out=res, seed=0)
        assert code == EXIT_OK
        doc = read(res)
        assert doc["result"]["conditional_on_declared_regime"] is True
        assert "stationary" in doc["result"]["intervals"]

    def test_infer_data_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("i,t,y\n1,0,0\n1,1,1\n2,0,0\n")
        code = run(None, [f"input.path={bad}"], command="infer", out=tmp_path / "o.json", seed=0)
        assert code == EXIT_DATA

    def test_infer_missing_file(self, tmp_path):
        code = run(None, [f"input.path={tmp_path / 'none.csv'}"], command="infer",
                   out=tmp_path / "o.json", seed=0)
        assert code == EXIT_IO

    def test_infer_requires_path(self, tmp_path):
        assert run(None, [], command="infer", out=tmp_path / "o.json", seed=0) == EXIT_CONFIG

    def test_berry_esseen_and_variance_curve(self, tmp_path):
        be = tmp_path / "be.json"
        code = run(None, ["n_grid=[2,4,8,16]", "replications=100", "t_len=10"],
                   command="berry-esseen", out=be, seed=1)
        assert code == EXIT_OK
        assert len((tmp_path / "be_curve.csv").read_text().splitlines()) == 5
        vc = tmp_path / "vc.json"
        code = run(None, ["t_grid=[10,20,40]", "n=5", "replications=50"],
                   command="variance-curve", out=vc, seed=1)
        assert code == EXIT_OK
        assert read(vc)["kind"] == "variance_curve"

    def test_short_grid_rejected(self, tmp_path):
        code = run(None, ["n_grid=[2,4,8]"], command="berry_esseen", out=tmp_path / "x.json", seed=1)
        assert code == EXIT_CONFIG

    @pytest.mark.parametrize(
        "over",
        [
            ["grid_steps=100", "replications=20"],
            ["functional=local_to_unity", "c=1", "grid_steps=100", "replications=20"],
            ["functional=mildly_explosive", "c=-1", "replications=20"],
        ],
    )
    def test_wiener(self, tmp_path, over):
        out = tmp_path / "w.json"
        assert run(None, over, command="wiener", out=out, seed=1) == EXIT_OK
        assert len(read(out)["result"]["mean"]) == 2

    def test_wiener_bad_c(self, tmp_path):
        code = run(None, ["functional=mildly_explosive", "c=1"], command="wiener",
                   out=tmp_path / "w.json", seed=1)
        assert code == EXIT_CONFIG


class TestMain:
    def test_argparse_surface(self, tmp_path):
        out = tmp_path / "m.json"
        code = main(["mc", "--set", "n=5", "--set", "t_len=10", "--set", "replications=20",
                     "--out", str(out), "--emit", "json,csv_stats", "--seed", "3", "--workers", "1"])
        assert code == EXIT_OK
        assert read(out)["run_config"]["workers"] == 1

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "m.json"
        proc = subprocess.run(
            [sys.executable, "-m", "panelar", "mc", "--set", "n=0", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == EXIT_CONFIG
        assert "n must be" in proc.stderr
