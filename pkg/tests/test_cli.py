import json

import pytest
from click.testing import CliRunner

from giftworld.cli import main
from giftworld.config import load_run_config, run_config_from_dict, validate_run_config
from giftworld.errors import ConfigError


@pytest.fixture
def runner():
    return CliRunner()


class TestMatrixSweep:
    def test_writes_csv(self, runner, tmp_path):
        out = tmp_path / "sweep.csv"
        result = runner.invoke(main, ["matrix-sweep", "--t-step", "0.5",
                                      "--s-step", "0.5", "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 6  # header + 5 S rows
        assert lines[0].startswith("s\\t,")

    def test_bad_grid_fails_nonzero(self, runner, tmp_path):
        result = runner.invoke(main, ["matrix-sweep", "--t-step", "-1",
                                      "--out", str(tmp_path / "x.csv")])
        assert result.exit_code != 0
        assert "error" in result.output or result.exception is not None


class TestTrain:
    def test_preset_run(self, runner, tmp_path):
        out = tmp_path / "run"
        result = runner.invoke(main, ["train", "--preset", "ipd-selfplay",
                                      "--episodes", "8", "--seed", "1",
                                      "--out-dir", str(out)])
        assert result.exit_code == 0, result.output
        rows = [json.loads(l) for l in
                (out / "metrics.jsonl").read_text().strip().splitlines()]
        assert len(rows) == 8
        assert {"episode", "collective", "gift_mean"} <= set(rows[0])

    def test_requires_exactly_one_source(self, runner):
        assert runner.invoke(main, ["train"]).exit_code != 0

    def test_config_file_run(self, runner, tmp_path):
        cfg = {"env": "ssg", "agents": ["a2c"] * 4, "episodes": 2, "seed": 0,
               "hyper": {"hidden_sizes": [8], "eps_div": 10}}
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg))
        result = runner.invoke(main, ["train", "--config", str(path)])
        assert result.exit_code == 0, result.output

    def test_schema_violation_reports_key_path(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"env": "ssg", "agents": ["a2c"] * 4,
                                    "hyper": {"no_such_knob": 1}}))
        result = runner.invoke(main, ["train", "--config", str(path)])
        assert result.exit_code != 0
        assert "hyper" in result.output


class TestSchelling:
    def test_csv_and_report(self, runner, tmp_path):
        out = tmp_path / "curve.csv"
        result = runner.invoke(main, ["schelling", "--env", "ssh",
                                      "--episodes", "5", "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output[result.output.index("{"):])
        assert report["fear"] is True
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "n_cooperators,cooperator_return,defector_return"
        assert len(lines) == 6


class TestEval:
    def test_eval_from_checkpoint(self, runner, tmp_path):
        out = tmp_path / "run"
        r = runner.invoke(main, ["train", "--preset", "ipd-selfplay",
                                 "--episodes", "4", "--out-dir", str(out)])
        assert r.exit_code == 0, r.output
        ckpt = out / "checkpoints" / "ep0000004"
        metrics_out = tmp_path / "eval.jsonl"
        r = runner.invoke(main, ["eval", "--preset", "ipd-selfplay",
                                 "--checkpoint-dir", str(ckpt),
                                 "--episodes", "2", "--real-observations",
                                 "--out", str(metrics_out)])
        assert r.exit_code == 0, r.output
        rows = [json.loads(l) for l in metrics_out.read_text().strip().splitlines()]
        assert len(rows) == 2


class TestConfigModule:
    def test_validate_requires_env_or_preset(self):
        with pytest.raises(ConfigError):
            validate_run_config({"episodes": 5})

    def test_error_names_path(self):
        with pytest.raises(ConfigError) as err:
            validate_run_config({"env": "nope", "agents": ["a2c"]})
        assert "env" in str(err.value)

    def test_preset_expansion(self):
        cfg = run_config_from_dict({"preset": "cleanup-mixed-scripted", "seed": 3})
        assert cfg.roster == ["lase", "scripted-cooperator", "scripted-defector",
                              "scripted-random"]
        assert cfg.env_kind == "cleanup"
        assert cfg.seed == 3

    def test_env_overrides_roundtrip(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"env": "ssg", "agents": ["a2c"] * 4,
                                    "env_overrides": {"episode_len": 7}}))
        cfg = load_run_config(str(path))
        assert cfg.env_config().episode_len == 7
