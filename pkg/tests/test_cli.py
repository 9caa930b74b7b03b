import csv
import json
from pathlib import Path

import numpy as np
import pytest

from magnetokernel import PhysParams, free_kernel
from magnetokernel.cli import EXIT_CONFIG, EXIT_OK, ESTIMATE_HEADER, build_config, run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_kernel_free_config(tmp_path):
    assert run(["kernel", "--config", str(CONFIGS / "free_kernel.toml"), "--out", str(tmp_path)]) == EXIT_OK
    rows = _rows(tmp_path / "free-kernel.csv")
    assert list(rows[0].keys()) == list(ESTIMATE_HEADER)
    p = PhysParams(1.0, 1.0, 2)
    for r in rows:
        x = np.array(r["x"].split(";"), dtype=float)
        xp = np.array(r["x_prime"].split(";"), dtype=float)
        exact = float(free_kernel(x, xp, float(r["tau_or_m"]), p))
        assert abs(float(r["mean"]) - exact) <= 3 * float(r["std_error"]) + 1e-14
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    for key in ("config_hash", "seed", "subcommand", "budgets", "started", "elapsed_s"):
        assert key in manifest


def test_kato_constant_field(tmp_path):
    status = run(["check-bounds", "kato", "--config", str(CONFIGS / "constant_b_kato.toml"), "--out", str(tmp_path)])
    assert status == EXIT_OK
    rows = _rows(tmp_path / "constant-b-check-bounds-kato.csv")
    assert len(rows) == 4
    assert all(r["verdict"] == "holds" for r in rows)


def test_negative_tau_names_the_field(tmp_path, capsys):
    cfg = _write(tmp_path, (CONFIGS / "free_kernel.toml").read_text().replace("tau = [0.5, 1.0]", "tau = [-0.5]"))
    assert run(["kernel", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "points.tau" in capsys.readouterr().err


def test_missing_seed_rejected(tmp_path, capsys):
    cfg = _write(tmp_path, (CONFIGS / "free_kernel.toml").read_text().replace("seed = 1\n", ""))
    assert run(["kernel", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "seed" in capsys.readouterr().err
    assert run(["kernel", "--config", str(cfg), "--seed", "4", "--out", str(tmp_path)]) == EXIT_OK


def test_unknown_subcommand():
    assert run(["frobnicate", "--config", "x.toml"]) != EXIT_OK


def test_bad_budget(tmp_path):
    assert run(["kernel", "--config", str(CONFIGS / "free_kernel.toml"), "--set", "budgets.n_paths=-3", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_set_override_only_scalars():
    raw = {"seed": 1, "physics": {"dimension": 1}, "points": {"x": [[0.0]]}}
    cfg = build_config(raw, overrides=["physics.hbar=2.0"])
    assert cfg.params.hbar == 2.0
    with pytest.raises(ValueError):
        build_config(raw, overrides=["points.x=1.0"])


def test_config_hash_ignores_workers_and_out():
    raw = {"seed": 1, "physics": {"dimension": 1}}
    a = build_config(dict(raw, workers=1, out="a"))
    b = build_config(dict(raw, workers=3, out="b"))
    c = build_config(dict(raw, seed=2))
    assert a.config_hash == b.config_hash != c.config_hash


def test_reruns_are_byte_identical(tmp_path):
    one, two = tmp_path / "w1", tmp_path / "w3"
    cfg = str(CONFIGS / "constant_b_kato.toml")
    assert run(["kernel", "--config", cfg, "--out", str(one), "--workers", "1"]) == EXIT_OK
    assert run(["kernel", "--config", cfg, "--out", str(two), "--workers", "3"]) == EXIT_OK
    name = "constant-b-kernel.csv"
    assert (one / name).read_bytes() == (two / name).read_bytes()


def test_sample_paths_and_field(tmp_path):
    cfg = _write(
        tmp_path,
        """
name = "diag"
seed = 2
[physics]
dimension = 2
[covariance]
kind = "bounded_isotropic"
amplitude = 1.0
length = 1.0
transverse = true
[budgets]
n_paths = 2000
n_steps = 8
n_fields = 20
""",
    )
    assert run(["sample-paths", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert run(["sample-field", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "diag-sample-paths.csv").exists()
    assert (tmp_path / "diag-sample-field.csv").exists()
