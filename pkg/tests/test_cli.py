import json

import numpy as np
from click.testing import CliRunner

from sensetrack.cli import main
from sensetrack.harness import SyntheticSpec, generate_synthetic, save_cases

SPEC = dict(
    dim=8,
    n_labels=1,
    senses_per_label=3,
    context_words_per_sense=6,
    n_noise_words=5,
    cases_per_label=2,
    case_turns=6,
    min_separation_deg=60.0,
)


def write_fixture(tmp_path):
    store, _, cases = generate_synthetic(
        SyntheticSpec(**SPEC), np.random.default_rng(5)
    )
    emb = tmp_path / "embeddings.txt"
    store.save(emb)
    cases_path = tmp_path / "cases.jsonl"
    save_cases(cases, cases_path)
    return emb, cases_path


def test_replay_writes_metrics(tmp_path):
    emb, cases = write_fixture(tmp_path)
    out = tmp_path / "out"
    result = CliRunner().invoke(
        main,
        ["replay", "--cases", str(cases), "--embeddings", str(emb),
         "--mode", "no_kalman", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    bundle = json.loads((out / "metrics_no_kalman.json").read_text())
    assert "accuracy" in bundle and bundle["mode"] == "no_kalman"
    csv_lines = (out / "trajectory_no_kalman.csv").read_text().splitlines()
    assert csv_lines[0].startswith("turn")


def test_replay_with_config_file(tmp_path):
    emb, cases = write_fixture(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dim": 8, "seed": 2, "particle_multiplier": 4}))
    result = CliRunner().invoke(
        main,
        ["replay", "--cases", str(cases), "--embeddings", str(emb),
         "--config", str(cfg), "--out", str(tmp_path / "out")],
    )
    assert result.exit_code == 0, result.output


def test_replay_bad_config_fails_cleanly(tmp_path):
    emb, cases = write_fixture(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dim": 1}))
    result = CliRunner().invoke(
        main,
        ["replay", "--cases", str(cases), "--embeddings", str(emb),
         "--config", str(cfg), "--out", str(tmp_path / "out")],
    )
    assert result.exit_code != 0
    assert "dim" in result.output


def test_synth_deterministic(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SPEC))
    runner = CliRunner()
    for name in ("a", "b"):
        result = runner.invoke(
            main,
            ["synth", "--spec", str(spec), "--seed", "7", "--out", str(tmp_path / name)],
        )
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a" / "embeddings.txt").read_bytes() == (
        tmp_path / "b" / "embeddings.txt"
    ).read_bytes()
    assert (tmp_path / "a" / "cases.jsonl").read_bytes() == (
        tmp_path / "b" / "cases.jsonl"
    ).read_bytes()


def test_sweep_writes_rows(tmp_path):
    emb, cases = write_fixture(tmp_path)
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({"lambda_w": [0.7, 0.9]}))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dim": 8, "seed": 2, "particle_multiplier": 4}))
    out = tmp_path / "sweep.json"
    result = CliRunner().invoke(
        main,
        ["sweep", "--grid", str(grid), "--cases", str(cases),
         "--embeddings", str(emb), "--config", str(cfg), "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    rows = json.loads(out.read_text())
    assert len(rows) == 2 and all("accuracy" in r for r in rows)


def test_session_pipe(tmp_path):
    emb, _ = write_fixture(tmp_path)
    result = CliRunner().invoke(
        main,
        ["session", "--embeddings", str(emb), "--targets", "L0"],
        input="them: L0 L0.s0.w0 L0.s0.w1\nnothing-prefixed\n\n",
    )
    assert result.exit_code == 0, result.output
    assert "L0:" in result.output
    assert "prefix with" in result.output


def test_session_unknown_target(tmp_path):
    emb, _ = write_fixture(tmp_path)
    result = CliRunner().invoke(
        main, ["session", "--embeddings", str(emb), "--targets", "zzz"], input="\n"
    )
    assert result.exit_code != 0
