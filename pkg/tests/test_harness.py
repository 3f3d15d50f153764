import hashlib
import json
import os

import numpy as np
import pytest

from sqap.attention import AttentionConfig, AttentionVector, Regime, compute_attention
from sqap.errors import InvalidSpec
from sqap.harness import (
    HarnessConfig,
    RunRecord,
    SceneSpec,
    config_from_dict,
    emit_heatmap,
    evaluate_scene,
    generate_scene,
    heatmap_pixels,
    load_config,
    read_pgm,
    run_pipeline,
    scene_weights,
    sweep,
    sweep_records,
)
from sqap.harness.cli import main
from sqap.harness.io import read_csv
from sqap.pruner import Ablation, PruneConfig, TokenGrid

CONFIG = os.path.join(os.path.dirname(__file__), "..", "configs", "default.json")


def test_null_scene_is_gaussian():
    spec = SceneSpec(salient_tokens=(), outlier_channels=(), seed=4)
    x, truth = generate_scene(spec)
    assert x.shape == (512, 257)
    n = x.shape[1]
    assert np.all(np.abs(x.mean(axis=1)) <= 4 / np.sqrt(n))
    assert truth.salient == () and truth.outlier_channels == ()


def test_scene_determinism_and_truth():
    spec = SceneSpec(seed=11)
    x1, t1 = generate_scene(spec)
    x2, t2 = generate_scene(spec)
    assert x1.tobytes() == x2.tobytes() and t1 == t2
    # u = 112 - 30 = 82, v = 112 + 25 = 137 on 14 px patches -> token (5, 9)
    assert t1.robot_token == 9 * 16 + 5


def test_single_strong_salient_token_wins():
    hits = 0
    for seed in range(100):
        spec = SceneSpec(seed=seed, salient_tokens=((77, 10.0),))
        x, _ = generate_scene(spec)
        wq, wk = scene_weights(spec)
        a = compute_attention(wq, wk, x, AttentionConfig(512, 256))
        hits += int(np.argmax(a.scores)) == 77
    assert hits >= 99


@pytest.mark.parametrize("bad", [
    dict(salient_tokens=((256, 1.0),)),
    dict(outlier_channels=((3, 0.5),)),
    dict(outlier_channels=((600, 5.0),)),
])
def test_invalid_scene(bad):
    with pytest.raises(InvalidSpec):
        generate_scene(SceneSpec(**bad))


def test_fp_no_pruning_run():
    cfg = HarnessConfig()
    rec = run_pipeline(cfg.scene, "fp", cfg, prune=PruneConfig(0.0, world_point=cfg.scene.robot_point))
    assert rec.n_final == 256 and rec.topk_jaccard == 1.0 and rec.error == ""


def test_run_records_errors_instead_of_raising():
    cfg = HarnessConfig()
    rec = run_pipeline(SceneSpec(salient_tokens=((999, 1.0),)), "naive", cfg)
    assert rec.error.startswith("InvalidSpec")


def test_ablation_ladder_budget_invariance():
    cfg = HarnessConfig()
    ev = evaluate_scene(cfg.scene, cfg)
    from sqap.pruner import prune_tokens

    finals = [prune_tokens(ev.attention("hadamard"), cfg.scene.camera, cfg.scene.grid, cfg.prune, ab).final_set
              for ab in Ablation]
    assert {len(f) for f in finals} == {154}
    assert len({frozenset(f) for f in finals}) == 3


def test_sweep_shape_and_determinism(tmp_path):
    cfg = HarnessConfig()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    sweep(cfg, a, ratios=[0.3, 0.6], seeds=3)
    sweep(cfg, b, ratios=[0.3, 0.6], seeds=3, workers=3)
    assert a.read_bytes() == b.read_bytes()
    rows = read_csv(a)
    assert len(rows) == 2 * 3 * 3
    assert [(r["ratio"], r["regime"]) for r in rows[:3]] == [("0.3", "fp"), ("0.3", "naive"), ("0.3", "hadamard")]


def test_sweep_zero_seeds_header_only(tmp_path):
    out = sweep(HarnessConfig(), tmp_path / "h.csv", seeds=0)
    assert out.read_text() == ",".join(RunRecord.columns()) + "\n"


def test_sweep_bad_scene_gives_error_rows():
    cfg = HarnessConfig(scene=SceneSpec(outlier_channels=((9999, 5.0),)))
    recs = sweep_records(cfg, ratios=[0.4], seeds=2)
    assert len(recs) == 6 and all(r.error.startswith("InvalidSpec") for r in recs)


def test_record_csv_roundtrip(tmp_path):
    cfg = HarnessConfig()
    path = tmp_path / "r.csv"
    sweep(cfg, path, ratios=[0.4], seeds=2)
    from sqap.harness.pipeline import records_csv

    recs = [RunRecord.from_row(r) for r in read_csv(path)]
    assert records_csv(recs) == path.read_text()


def test_heatmap_conventions(tmp_path):
    grid = TokenGrid(1, 1, 4, 3)
    onehot = np.zeros(12)
    onehot[5] = 1
    px = heatmap_pixels(AttentionVector(onehot), grid)
    assert px.shape == (3, 4) and px[1, 1] == 255 and px.sum() == 255
    assert np.all(heatmap_pixels(np.full(12, 1 / 12), grid) == 128)
    s = np.random.default_rng(3).random(12)
    lo, hi = s.min(), s.max()
    want = [round(255 * (v - lo) / (hi - lo)) for v in s]
    assert heatmap_pixels(s, grid).ravel().tolist() == want
    out = tmp_path / "h.pgm"
    emit_heatmap(s, grid, out)
    assert out.read_bytes().startswith(b"P5\n4 3\n255\n")
    np.testing.assert_array_equal(read_pgm(out).ravel(), want)


def test_config_loading_and_env_override(tmp_path):
    cfg = load_config(CONFIG, env={})
    assert cfg.scene.grid.n_tokens == 256 and cfg.sweep.ratios == (0.3, 0.4, 0.5, 0.6)
    assert cfg.prune.world_point == cfg.scene.robot_point
    assert load_config(CONFIG, env={"SQAP_SEED": "77"}).scene.seed == 77
    from sqap.errors import ConfigError

    with pytest.raises(ConfigError):
        config_from_dict({"scene": {"bogus": 1}}, env={})
    with pytest.raises(ConfigError):
        config_from_dict({"quant": {"bits_w": 1}}, env={})


def test_cli_commands(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("SQAP_SEED", raising=False)
    assert main(["run", "--config", CONFIG, "--regime", "naive", "--ablation", "attn+ring"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["regime"] == "naive" and rec["ablation"] == "attn+ring" and rec["n_final"] == 154

    assert main(["bops", "--config", CONFIG]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["quant_speedup"] == 16.0

    pgm = tmp_path / "a.pgm"
    assert main(["heatmap", "--config", CONFIG, "--out", str(pgm), "--regime", "fp"]) == 0
    assert read_pgm(pgm).shape == (16, 16)

    small = tmp_path / "small.json"
    doc = json.load(open(CONFIG))
    doc["sweep"]["seeds"] = 2
    small.write_text(json.dumps(doc))
    csv_path = tmp_path / "s.csv"
    assert main(["sweep", "--config", str(small), "--out", str(csv_path)]) == 0
    assert len(read_csv(csv_path)) == 4 * 2 * 3


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["bops", "--config", str(bad)]) == 1
    bad.write_text(json.dumps({"prune": {"ratio": 1.5}}))
    assert main(["bops", "--config", str(bad)]) == 1
    assert main(["bops", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["sweep", "--config", CONFIG, "--out", str(tmp_path / "nodir" / "x.csv")]) in (2,)
