import copy
import json

import pytest

from hwcsum.harness import ExperimentConfig, load_corpus_file, run_experiment, sweep_vocab
from hwcsum.rouge import METRICS


def small_config(synthetic_dir, **overrides):
    cfg = dict(
        name="t",
        part1=str(synthetic_dir / "part1.txt"),
        part3=str(synthetic_dir / "part3.txt"),
        lexicon=str(synthetic_dir / "lexicon.tsv"),
        representations=["char_char", "word_char"],
        seeds=[0],
        n_validation=20,
        epochs=1,
        batch_size=32,
        beam_width=3,
        model={"embed_dim": 12, "hidden_dim": 12, "dropout": 0.0, "max_decode_len": 12},
    )
    cfg.update(overrides)
    return ExperimentConfig(**cfg)


def test_load_corpus_file_pseudo_xml(synthetic_dir):
    part1 = load_corpus_file(synthetic_dir / "part1.txt", "I")
    assert len(part1) == 200
    part3 = load_corpus_file(synthetic_dir / "part3.txt", "III")
    assert len(part3) == 30
    assert all(p.human_label is not None for p in part3.pairs)


def test_config_validation():
    with pytest.raises(ValueError, match="lexicon"):
        ExperimentConfig(name="x", part1="a", part3="b", representations=["word_char"])
    with pytest.raises(ValueError, match="seeds"):
        ExperimentConfig(name="x", part1="a", part3="b", representations=["char_char"], seeds=[])
    with pytest.raises(ValueError, match="representation"):
        ExperimentConfig(name="x", part1="a", part3="b", representations=["wordchar"])
    with pytest.raises(ValueError, match="model config"):
        ExperimentConfig(name="x", part1="a", part3="b", representations=["char_char"],
                         model={"embde_dim": 3})


def test_config_from_file_single_representation(tmp_path, synthetic_dir):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "name": "single",
        "part1": str(synthetic_dir / "part1.txt"),
        "part3": str(synthetic_dir / "part3.txt"),
        "representation": "char_char",
    }))
    cfg = ExperimentConfig.from_file(path)
    assert cfg.representations == ["char_char"]
    assert cfg.seeds == [0, 1, 2, 3, 4]


def test_config_from_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"name": "x", "part1": "a", "part3": "b", "nonsense": 1}))
    with pytest.raises(ValueError, match="nonsense"):
        ExperimentConfig.from_file(path)


def test_run_experiment_both_representations(tmp_path, synthetic_dir):
    cfg = small_config(synthetic_dir)
    report, all_ok = run_experiment(cfg, tmp_path)
    assert all_ok
    assert set(report["runs"]) == {"char_char", "word_char"}
    for representation in report["runs"]:
        run = report["runs"][representation]
        assert run["failed_seeds"] == []
        record = run["seeds"]["0"]
        assert record["status"] == "ok"
        assert record["n_train"] == 180 and record["n_validation"] == 20
        assert record["n_test"] == 17
        for m in METRICS:
            assert 0.0 <= run["mean_scores"][m]["f1"] <= 1.0
    # the hybrid encoder sees words, the baseline sees characters
    assert (report["runs"]["word_char"]["seeds"]["0"]["src_vocab_size"]
            != report["runs"]["char_char"]["seeds"]["0"]["src_vocab_size"])
    # artifacts on disk
    base = tmp_path / "t"
    assert (base / "report.json").exists()
    for representation in ("char_char", "word_char"):
        seed_dir = base / representation / "seed0"
        assert (seed_dir / "vocab" / "src_vocab.txt").exists()
        assert (seed_dir / "checkpoints" / "model.npz").exists()
        assert (seed_dir / "decodes" / "candidates.jsonl").exists()
        assert (seed_dir / "scores.jsonl").exists()


def test_mean_is_arithmetic_over_seeds(tmp_path, synthetic_dir):
    cfg = small_config(synthetic_dir, seeds=[0, 1], representations=["char_char"])
    report, all_ok = run_experiment(cfg, tmp_path)
    assert all_ok
    run = report["runs"]["char_char"]
    for m in METRICS:
        per_seed = [run["seeds"][s]["scores"][m]["f1"] for s in ("0", "1")]
        assert run["mean_scores"][m]["f1"] == sum(per_seed) / 2


def _strip_volatile(report):
    report = copy.deepcopy(report)
    report.pop("created_at", None)
    for run in report["runs"].values():
        for record in run["seeds"].values():
            record.pop("timing", None)
    return report


def test_run_experiment_deterministic(tmp_path, synthetic_dir):
    cfg = small_config(synthetic_dir, representations=["word_char"])
    r1, _ = run_experiment(cfg, tmp_path / "a")
    r2, _ = run_experiment(cfg, tmp_path / "b")
    a, b = _strip_volatile(r1), _strip_volatile(r2)
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_report_is_self_describing(tmp_path, synthetic_dir):
    # a report's embedded config echo is enough to reproduce its scores
    cfg = small_config(synthetic_dir, representations=["char_char"])
    report, _ = run_experiment(cfg, tmp_path / "orig")
    echo = dict(report["config"])
    rebuilt = ExperimentConfig(**echo)
    replay, _ = run_experiment(rebuilt, tmp_path / "replay")
    assert (replay["runs"]["char_char"]["mean_scores"]
            == report["runs"]["char_char"]["mean_scores"])
    assert replay["input_hashes"] == report["input_hashes"]


def test_failed_seed_is_recorded_not_fatal(tmp_path, synthetic_dir):
    cfg = small_config(synthetic_dir, representations=["char_char"], n_validation=200)
    report, all_ok = run_experiment(cfg, tmp_path)
    assert not all_ok
    run = report["runs"]["char_char"]
    assert run["failed_seeds"] == [0]
    assert run["seeds"]["0"]["status"] == "failed"
    assert "error" in run["seeds"]["0"]
    assert run["mean_scores"] is None


def test_sweep_two_sizes(tmp_path, synthetic_dir):
    cfg = small_config(synthetic_dir, representations=["char_char"])
    table, all_ok = sweep_vocab(cfg, [20, 50], tmp_path)
    assert all_ok
    assert [row["requested_size"] for row in table] == [20, 50]
    for row in table:
        cell = row["runs"]["char_char"]
        assert cell["encoder_vocab_used"] <= row["requested_size"]
        assert cell["mean_scores"] is not None
    assert (tmp_path / "t-sweep.json").exists()


def test_sweep_clamps_oversized_request(tmp_path, synthetic_dir):
    cfg = small_config(synthetic_dir, representations=["char_char"])
    with pytest.warns(UserWarning, match="clamped"):
        table, _ = sweep_vocab(cfg, [100000], tmp_path)
    assert table[0]["runs"]["char_char"]["encoder_vocab_used"] < 100000


def test_sweep_rejects_nonpositive_sizes(tmp_path, synthetic_dir):
    cfg = small_config(synthetic_dir, representations=["char_char"])
    with pytest.raises(ValueError):
        sweep_vocab(cfg, [0, 10], tmp_path)
