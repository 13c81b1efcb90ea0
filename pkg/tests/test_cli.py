import json
from pathlib import Path

import numpy as np
import pytest

from nll.cli import main
from nll.data import read_dataset


def run(*argv):
    rc = main([str(a) for a in argv])
    assert rc == 0, f"command failed: {argv}"


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Shared inputs for CLI runs: noise, world, datasets, configs."""
    root = tmp_path_factory.mktemp("cli")
    run("noise", "make", "--kind", "uniform", "--k", 2, "--rate", 0.25, "--out", root / "noise.json")
    run("data", "world", "--out", root / "world.json")
    run("data", "make", "--kind", "moons", "--m", 60, "--sigma", 0.1, "--seed", 3, "--out", root / "moons.csv")
    run("data", "corrupt", "--noise", root / "noise.json", "--seed", 4, "--in", root / "moons.csv", "--out", root / "noisy.csv")
    run(
        "data", "split", "--val-frac", 0.25, "--seed", 5,
        "--in", root / "noisy.csv", "--train-out", root / "tr.csv", "--val-out", root / "va.csv",
    )
    (root / "train_cfg.json").write_text(json.dumps({"max_steps": 150, "checkpoint_every": 50}))
    (root / "sweep_cfg.json").write_text(
        json.dumps(
            {
                "dataset_kind": "moons",
                "noise": {"k": 2, "rows": [[0.7, 0.3], [0.2, 0.8]]},
                "sizes": [8, 16],
                "train": {"max_steps": 100, "checkpoint_every": 50},
                "repeats": 2,
                "noise_sigma": 0.1,
                "test_size": 200,
                "base_seed": 11,
                "workers": 1,
            }
        )
    )
    (root / "nts_cfg.json").write_text(
        json.dumps(
            {
                "dataset_kind": "moons",
                "noise": {"k": 2, "rows": [[0.7, 0.3], [0.3, 0.7]]},
                "m": 120,
                "train": {"max_steps": 200, "checkpoint_every": 100, "batch_size": 32},
                "repeats": 2,
                "noise_sigma": 0.1,
                "val_fraction": 0.25,
                "test_size": 200,
                "base_seed": 12,
                "workers": 1,
            }
        )
    )
    return root


_twice_counter = 0


def _twice(workspace, tmp_path, command_builder):
    """Run a command into two fresh directories; return both dirs."""
    global _twice_counter
    _twice_counter += 1
    dirs = []
    for name in ("a", "b"):
        out = tmp_path / f"{_twice_counter}{name}"
        out.mkdir()
        run(*command_builder(out))
        dirs.append(out)
    return dirs


def assert_identical_trees(a: Path, b: Path):
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b and files_a
    for rel in files_a:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), f"{rel} differs between reruns"


class TestDeterminism:
    def test_noise_make(self, workspace, tmp_path):
        a, b = _twice(workspace, tmp_path, lambda d: ("noise", "make", "--kind", "pair", "--k", 4, "--rate", 0.2, "--out", d / "t.json"))
        assert_identical_trees(a, b)

    def test_data_pipeline(self, workspace, tmp_path):
        def build(d):
            return ("data", "make", "--kind", "circles", "--m", 50, "--sigma", 0.05, "--seed", 9, "--out", d / "c.csv")

        a, b = _twice(workspace, tmp_path, build)
        assert_identical_trees(a, b)

    def test_data_corrupt_and_split(self, workspace, tmp_path):
        def build(d):
            return ("data", "corrupt", "--noise", workspace / "noise.json", "--seed", 4, "--in", workspace / "moons.csv", "--out", d / "n.csv")

        a, b = _twice(workspace, tmp_path, build)
        assert_identical_trees(a, b)

        def build2(d):
            return (
                "data", "split", "--val-frac", 0.3, "--seed", 6,
                "--in", workspace / "noisy.csv", "--train-out", d / "tr.csv", "--val-out", d / "va.csv",
            )

        a, b = _twice(workspace, tmp_path, build2)
        assert_identical_trees(a, b)

    def test_train(self, workspace, tmp_path):
        def build(d):
            return (
                "train", "--data", workspace / "tr.csv", "--val", workspace / "va.csv",
                "--config", workspace / "train_cfg.json", "--out", d / "model.json", "--checkpoints", d / "ckpt.csv",
            )

        a, b = _twice(workspace, tmp_path, build)
        assert_identical_trees(a, b)
        header, *rows = (a / "ckpt.csv").read_text().splitlines()
        assert header == "step,train_acc,val_acc"
        assert [int(r.split(",")[0]) for r in rows] == [50, 100, 150]
        for row in rows:
            _, tr, va = row.split(",")
            assert 0.0 <= float(tr) <= 1.0 and 0.0 <= float(va) <= 1.0

    def test_bounds_commands(self, workspace, tmp_path):
        a, b = _twice(workspace, tmp_path, lambda d: ("bounds", "gen", "--m", 100000, "--dvc", 8, "--delta", 0.05, "--out", d / "g.json"))
        assert_identical_trees(a, b)
        a, b = _twice(workspace, tmp_path, lambda d: ("bounds", "val", "--n", 1000, "--delta", 0.01, "--out", d / "v.json"))
        assert_identical_trees(a, b)
        doc = json.loads((a / "v.json").read_text())
        assert abs(doc["bound"] - 0.0480) < 5e-4

    def test_oracle_best_and_audit(self, workspace, tmp_path):
        a, b = _twice(
            workspace, tmp_path,
            lambda d: ("oracle", "best", "--world", workspace / "world.json", "--noise", workspace / "noise.json", "--out", d / "best.json"),
        )
        assert_identical_trees(a, b)
        doc = json.loads((a / "best.json").read_text())
        assert doc["value"] == 0.75 and doc["unique"] is True

        def build(d):
            return (
                "bounds", "audit", "--model", a / "best.json", "--world", workspace / "world.json",
                "--noise", workspace / "noise.json", "--n", 100, "--delta", 0.05, "--trials", 100,
                "--seed", 3, "--out", d / "audit.json",
            )

        c, d = _twice(workspace, tmp_path, build)
        assert_identical_trees(c, d)

    def test_nts(self, workspace, tmp_path):
        def build(d):
            return (
                "nts", "--train", workspace / "tr.csv", "--val", workspace / "va.csv",
                "--config", workspace / "train_cfg.json", "--report", d / "nts.json",
            )

        a, b = _twice(workspace, tmp_path, build)
        assert_identical_trees(a, b)
        doc = json.loads((a / "nts.json").read_text())
        assert "nt_step" in doc and "student_checkpoints" in doc

    def test_sweep(self, workspace, tmp_path):
        a, b = _twice(workspace, tmp_path, lambda d: ("sweep", "--config", workspace / "sweep_cfg.json", "--out", d))
        assert_identical_trees(a, b)
        assert (a / "sweep.csv").exists() and (a / "sweep.json").exists() and (a / "sweep.svg").exists()

    def test_demo_tabular(self, workspace, tmp_path):
        a, b = _twice(workspace, tmp_path, lambda d: ("demo", "tabular", "--seed", 7, "--out", d))
        assert_identical_trees(a, b)
        doc = json.loads((a / "tabular_demo.json").read_text())
        assert abs(doc["exact"]["max_noisy_accuracy"] - 0.75) < 1e-12

    def test_nts_bench(self, workspace, tmp_path):
        a, b = _twice(workspace, tmp_path, lambda d: ("nts-bench", "--config", workspace / "nts_cfg.json", "--out", d))
        assert_identical_trees(a, b)
        doc = json.loads((a / "nts_benchmark.json").read_text())
        assert len(doc["runs"]) == 2


class TestCliBehavior:
    def test_env_variable_overrides(self, workspace, tmp_path, monkeypatch):
        monkeypatch.setenv("NLL_KIND", "uniform")
        monkeypatch.setenv("NLL_K", "2")
        monkeypatch.setenv("NLL_RATE", "0.25")
        run("noise", "make", "--out", tmp_path / "env.json")
        direct = tmp_path / "direct.json"
        run("noise", "make", "--kind", "uniform", "--k", 2, "--rate", 0.25, "--out", direct)
        assert (tmp_path / "env.json").read_bytes() == direct.read_bytes()

    def test_explicit_flag_beats_env(self, workspace, tmp_path, monkeypatch):
        monkeypatch.setenv("NLL_RATE", "0.4")
        run("noise", "make", "--kind", "uniform", "--k", 2, "--rate", 0.25, "--out", tmp_path / "t.json")
        doc = json.loads((tmp_path / "t.json").read_text())
        assert doc["rows"][0][0] == 0.75

    def test_invalid_rate_fails_cleanly(self, tmp_path, capsys):
        rc = main(["noise", "make", "--kind", "uniform", "--k", "2", "--rate", "0.7", "--out", str(tmp_path / "x.json")])
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_oracle_objective_must_be_unique(self, workspace, tmp_path, capsys):
        rc = main(
            [
                "oracle", "best", "--world", str(workspace / "world.json"),
                "--noise", str(workspace / "noise.json"), "--sample", str(workspace / "tr.csv"),
            ]
        )
        assert rc == 2
        assert "exactly one objective" in capsys.readouterr().err

    def test_corrupted_dataset_round_trip(self, workspace):
        noisy = read_dataset(workspace / "noisy.csv")
        clean = read_dataset(workspace / "moons.csv")
        assert np.array_equal(noisy.features, clean.features)
        assert not np.array_equal(noisy.labels, clean.labels)
