"""CLI dispatch, exit codes, config merging, and subcommand smoke tests."""

import json
from pathlib import Path

import pytest

from gridsynth.cli import main, parse_config_file
from gridsynth.errors import GridSynthError


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "run"
    code = main(
        [
            "run",
            "--env", "maze",
            "--seed", "11",
            "--out", str(out),
            "--corpus-size", "8",
            "--oracle-episodes", "3",
            "--max-iterations", "2",
            "--eval-episodes", "2",
        ]
    )
    assert code == 0
    return out


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert main(["bogus"]) == 1
        assert "invalid choice" in capsys.readouterr().err

    def test_no_subcommand_is_usage_error(self):
        assert main([]) == 1

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "collect" in capsys.readouterr().out

    def test_run_without_env_is_usage_error(self, tmp_path, capsys):
        assert main(["run", "--out", str(tmp_path / "x")]) == 1
        assert "requires --env" in capsys.readouterr().err

    def test_missing_run_dir_is_runtime_error(self, tmp_path, capsys):
        assert main(["eval", str(tmp_path / "nope")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_bad_seeds_value_is_usage_error(self, run_dir, capsys):
        assert main(["eval", str(run_dir), "--seeds", "soon"]) == 1
        capsys.readouterr()

    def test_explain_unknown_task_is_runtime_error(self, run_dir, capsys):
        assert main(["explain", str(run_dir), "--task", "oracle-9999:000"]) == 2
        assert "not solved" in capsys.readouterr().err


class TestEnvs:
    def test_lists_all_environments(self, capsys):
        assert main(["envs"]) == 0
        out = capsys.readouterr().out
        for tag in ("maze", "asterix", "spaceinvaders"):
            assert tag in out
        assert "request map -> direction -> action" in out


class TestCollectAndPrompts:
    def test_collect_writes_schema_file(self, tmp_path, capsys):
        out = tmp_path / "rollouts.json"
        assert main(["collect", "--env", "maze", "--count", "2", "--seed", "3",
                     "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["schema"] == "gridsynth-rollouts-v1"
        assert len(doc["rollouts"]) == 2
        assert "wrote 2 oracle trajectories" in capsys.readouterr().out

    def test_collect_without_out_is_usage_error(self, capsys):
        assert main(["collect", "--env", "maze"]) == 1
        capsys.readouterr()

    def test_export_prompts_from_rollouts(self, tmp_path, capsys):
        rolls = tmp_path / "r.json"
        assert main(["collect", "--env", "maze", "--count", "2", "--seed", "3",
                     "--out", str(rolls)]) == 0
        prompts = tmp_path / "p.txt"
        assert main(["export-prompts", "--rollouts", str(rolls), "--L", "4",
                     "--out", str(prompts)]) == 0
        msg = capsys.readouterr().out
        lines = prompts.read_text().splitlines()
        assert f"wrote {len(lines)} prompts" in msg
        seg = lines[0].split(" ")
        assert len(seg) == 8  # 4 steps of digits + action word
        assert all(len(s) == 26 for s in seg[0::2])

    def test_export_prompts_fresh_env(self, tmp_path):
        prompts = tmp_path / "p.txt"
        assert main(["export-prompts", "--env", "spaceinvaders", "--count", "2",
                     "--L", "3", "--out", str(prompts)]) == 0
        assert prompts.exists()

    def test_export_prompts_without_source_is_usage_error(self, tmp_path, capsys):
        assert main(["export-prompts", "--L", "3", "--out", str(tmp_path / "p")]) == 1
        capsys.readouterr()


class TestRunAndDownstream:
    def test_run_artifacts(self, run_dir):
        doc = json.loads((run_dir / "run.json").read_text())
        assert doc["schema"] == "gridsynth-run-v1"
        assert doc["config"]["seed"] == 11 and doc["config"]["corpus_size"] == 8
        assert (run_dir / "eval.csv").exists()
        assert (run_dir / "iter-0" / "library.json").exists()

    def test_library_report(self, run_dir, capsys):
        assert main(["library", str(run_dir)]) == 0
        out = capsys.readouterr().out
        assert "Number of extracted functions:" in out

    def test_eval_prints_csv(self, run_dir, capsys):
        assert main(["eval", str(run_dir), "--seeds", "123", "--episodes", "2"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("L,accuracy,n_tasks\n")

    def test_explain_solved_task(self, run_dir, tmp_path, capsys):
        solved = json.loads((run_dir / "iter-0" / "solved.json").read_text())
        task_id = solved["solved"][0]["taskId"]
        out = tmp_path / "bundle"
        assert main(["explain", str(run_dir), "--task", task_id,
                     "--out", str(out), "--format", "ascii"]) == 0
        assert (out / "manifest.json").exists()
        assert (out / "step-000.txt").exists()
        assert not (out / "step-000.svg").exists()
        capsys.readouterr()


class TestConfigFile:
    def test_flags_beat_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# sweep base\n"
            "env = maze\n"
            "corpus-size = 9999\n"
            "oracle_episodes = 3\n"
            "max-iterations = 1\n"
            "eval-episodes = 2\n"
            "seed = 4\n"
        )
        out = tmp_path / "cfgrun"
        code = main(["run", "--config", str(cfg), "--out", str(out),
                     "--corpus-size", "5"])
        assert code == 0
        doc = json.loads((out / "run.json").read_text())
        assert doc["config"]["corpus_size"] == 5  # flag wins
        assert doc["config"]["oracle_episodes"] == 3
        assert doc["config"]["seed"] == 4
        capsys.readouterr()

    def test_bad_line_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("corpus-size 1000\n")
        with pytest.raises(GridSynthError):
            parse_config_file(cfg)

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("warp-speed=9\n")
        with pytest.raises(GridSynthError):
            parse_config_file(cfg)

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(GridSynthError):
            parse_config_file(tmp_path / "absent.cfg")

    def test_comments_and_normalization(self, tmp_path):
        cfg = tmp_path / "ok.cfg"
        cfg.write_text("t-min = 4  # inline comment\n\nt_max=50\n")
        assert parse_config_file(cfg) == {"t_min": "4", "t_max": "50"}
