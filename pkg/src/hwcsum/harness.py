"""End-to-end experiment orchestration.

One experiment = for each representation (char/char baseline or hybrid
word/char) and each seed: split the training pool, build vocabularies
from the training split, train the attentional encoder-decoder,
beam-decode the score-filtered test set, and score with character
ROUGE. Per-seed artifacts land under
``<out>/<name>/<representation>/seed<k>/`` and the aggregate report at
``<out>/<name>/report.json``. Failed seeds are recorded and skipped in
the means rather than aborting the run.
"""

import datetime
import hashlib
import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import dedup as dedup_mod
from .corpus import CorpusPart, SplitSpec, filter_by_score, parse_lcsts, read_jsonl, split_train_validation
from .model import ModelConfig, beam_search, save_checkpoint, train
from .rouge import METRICS, evaluate_corpus
from .tokenizer import (
    Lexicon,
    build_vocab,
    char_tokenize,
    encode_pair_chars,
    encode_pair_hwc,
    word_segment,
)

REPRESENTATIONS = ("char_char", "word_char")

_MODEL_KEYS = {"embed_dim", "hidden_dim", "dropout", "max_decode_len"}
_CONFIG_KEYS = {
    "name", "part1", "part3", "lexicon", "representation", "seeds", "n_validation",
    "min_score", "dedup", "max_suffix_delta", "encoder_vocab_size", "decoder_vocab_size",
    "vocab_min_count", "epochs", "batch_size", "learning_rate", "beam_width", "model",
}


@dataclass
class ExperimentConfig:
    name: str
    part1: str
    part3: str
    representations: list[str]
    lexicon: str | None = None
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    n_validation: int = 1000
    min_score: int = 3
    dedup: bool = False
    max_suffix_delta: int = 15
    encoder_vocab_size: int | None = None
    decoder_vocab_size: int | None = None
    vocab_min_count: int = 1
    epochs: int = 5
    batch_size: int = 32
    learning_rate: float = 0.15
    beam_width: int = 5
    model: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        for rep in self.representations:
            if rep not in REPRESENTATIONS:
                raise ValueError(f"unknown representation {rep!r}; expected one of {REPRESENTATIONS}")
        if "word_char" in self.representations and not self.lexicon:
            raise ValueError("the word_char representation needs a lexicon file")
        unknown = set(self.model) - _MODEL_KEYS
        if unknown:
            raise ValueError(f"unknown model config keys: {sorted(unknown)}")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        rep = raw.pop("representation", list(REPRESENTATIONS))
        if isinstance(rep, str):
            rep = [rep]
        return cls(representations=rep, **raw)


def load_corpus_file(path, part: str = "I") -> CorpusPart:
    """Read a dataset file; .jsonl is canonical records, anything else pseudo-XML."""
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        if path.suffix == ".jsonl":
            return read_jsonl(f, part)
        corpus, _ = parse_lcsts(f, part)
        return corpus


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _source_tokens(text: str, representation: str, lex: Lexicon | None) -> list[str]:
    if representation == "word_char":
        return word_segment(text, lex)
    return char_tokenize(text)


def _scores_dict(means) -> dict:
    return {
        m: {"precision": means[m].precision, "recall": means[m].recall, "f1": means[m].f1}
        for m in METRICS
    }


def _run_seed(cfg: ExperimentConfig, representation: str, seed: int, pool: CorpusPart,
              test: CorpusPart, lex: Lexicon | None, encoder_vocab_size: int | None,
              seed_dir: Path) -> dict:
    t_start = time.perf_counter()
    for sub in ("vocab", "checkpoints", "decodes"):
        (seed_dir / sub).mkdir(parents=True, exist_ok=True)

    train_part, valid_part = split_train_validation(pool, SplitSpec(cfg.n_validation, seed))

    src_unit = "word" if representation == "word_char" else "char"
    src_vocab = build_vocab(
        (tok for p in train_part.pairs for tok in _source_tokens(p.short_text, representation, lex)),
        src_unit, min_count=cfg.vocab_min_count, max_size=encoder_vocab_size)
    tgt_vocab = build_vocab(
        (tok for p in train_part.pairs for tok in char_tokenize(p.summary)),
        "char", min_count=cfg.vocab_min_count, max_size=cfg.decoder_vocab_size)
    src_vocab.save(seed_dir / "vocab" / "src_vocab.txt")
    tgt_vocab.save(seed_dir / "vocab" / "tgt_vocab.txt")

    def encode(part: CorpusPart):
        if representation == "word_char":
            return [encode_pair_hwc(p, lex, src_vocab, tgt_vocab) for p in part.pairs]
        return [encode_pair_chars(p, src_vocab, tgt_vocab) for p in part.pairs]

    train_pairs = encode(train_part)
    valid_pairs = encode(valid_part)
    test_pairs = encode(test)

    model_cfg = ModelConfig(
        src_vocab_size=len(src_vocab), tgt_vocab_size=len(tgt_vocab), seed=seed,
        **cfg.model)
    params, history = train(
        train_pairs, model_cfg, epochs=cfg.epochs, batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate, valid_pairs=valid_pairs)
    save_checkpoint(params, seed_dir / "checkpoints" / "model.npz")
    with open(seed_dir / "train_log.jsonl", "w", encoding="utf-8") as f:
        for entry in history:
            f.write(json.dumps(entry, sort_keys=True) + "\n")

    candidates = []
    with open(seed_dir / "decodes" / "candidates.jsonl", "w", encoding="utf-8") as f:
        for pair, enc in zip(test.pairs, test_pairs):
            ids = beam_search(enc.src_ids, params, cfg.beam_width)
            text = "".join(tgt_vocab.decode(ids, strip_special=True))
            candidates.append(text)
            f.write(json.dumps({"id": pair.id, "candidate": text}, ensure_ascii=False) + "\n")

    references = [p.summary for p in test.pairs]
    means, per_pair = evaluate_corpus(candidates, references, unit="char")
    with open(seed_dir / "scores.jsonl", "w", encoding="utf-8") as f:
        for pair, scores in zip(test.pairs, per_pair):
            row = {"id": pair.id}
            row.update(_scores_dict(scores))
            f.write(json.dumps(row, sort_keys=True) + "\n")

    return {
        "status": "ok",
        "n_train": len(train_part),
        "n_validation": len(valid_part),
        "n_test": len(test),
        "src_vocab_size": src_vocab.n_content,
        "tgt_vocab_size": tgt_vocab.n_content,
        "scores": _scores_dict(means),
        "timing": {
            "seconds_per_epoch": [e["seconds"] for e in history],
            "total_seconds": time.perf_counter() - t_start,
        },
    }


def _mean_scores(seed_records: list[dict]) -> dict | None:
    ok = [r for r in seed_records if r["status"] == "ok"]
    if not ok:
        return None
    out = {}
    for m in METRICS:
        out[m] = {
            k: sum(r["scores"][m][k] for r in ok) / len(ok)
            for k in ("precision", "recall", "f1")
        }
    return out


def run_experiment(cfg: ExperimentConfig, out_dir, encoder_vocab_size: int | None = None,
                   run_name: str | None = None):
    """Execute the full protocol; returns (report, all_seeds_ok)."""
    out = Path(out_dir) / (run_name or cfg.name)
    out.mkdir(parents=True, exist_ok=True)
    encoder_vocab_size = encoder_vocab_size if encoder_vocab_size is not None else cfg.encoder_vocab_size

    pool = load_corpus_file(cfg.part1, "I")
    part3 = load_corpus_file(cfg.part3, "III")
    lex = Lexicon.from_file(cfg.lexicon) if cfg.lexicon else None

    if cfg.dedup:
        result = dedup_mod.clean_part1(pool, part3, dedup_mod.DedupConfig(cfg.max_suffix_delta))
        with open(out / "dedup_removals.jsonl", "w", encoding="utf-8") as f:
            for item in result.removed:
                f.write(json.dumps(
                    {"part1_id": item.part1_id, "part3_id": item.part3_id, "reason": item.reason},
                    sort_keys=True) + "\n")
        pool = result.kept

    test = filter_by_score(part3, cfg.min_score)

    hashes = {"part1": _sha256(cfg.part1), "part3": _sha256(cfg.part3)}
    if cfg.lexicon:
        hashes["lexicon"] = _sha256(cfg.lexicon)

    runs = {}
    all_ok = True
    for representation in cfg.representations:
        seed_records = {}
        failed = []
        for seed in cfg.seeds:
            seed_dir = out / representation / f"seed{seed}"
            try:
                seed_records[str(seed)] = _run_seed(
                    cfg, representation, seed, pool, test, lex, encoder_vocab_size, seed_dir)
            except Exception as exc:  # keep going; partial results matter
                seed_records[str(seed)] = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
                failed.append(seed)
                all_ok = False
        runs[representation] = {
            "seeds": seed_records,
            "mean_scores": _mean_scores(list(seed_records.values())),
            "failed_seeds": failed,
        }

    report = {
        "name": cfg.name,
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": _config_echo(cfg, encoder_vocab_size),
        "input_hashes": hashes,
        "runs": runs,
    }
    with open(out / "report.json", "w", encoding="utf-8") as f:
        json.dump(report, f, sort_keys=True, ensure_ascii=False, indent=2)
    return report, all_ok


def _config_echo(cfg: ExperimentConfig, encoder_vocab_size: int | None) -> dict:
    echo = {
        "name": cfg.name, "part1": cfg.part1, "part3": cfg.part3, "lexicon": cfg.lexicon,
        "representations": list(cfg.representations), "seeds": list(cfg.seeds),
        "n_validation": cfg.n_validation, "min_score": cfg.min_score, "dedup": cfg.dedup,
        "max_suffix_delta": cfg.max_suffix_delta, "encoder_vocab_size": encoder_vocab_size,
        "decoder_vocab_size": cfg.decoder_vocab_size, "vocab_min_count": cfg.vocab_min_count,
        "epochs": cfg.epochs, "batch_size": cfg.batch_size, "learning_rate": cfg.learning_rate,
        "beam_width": cfg.beam_width, "model": dict(cfg.model),
    }
    return echo


def sweep_vocab(cfg: ExperimentConfig, sizes: list[int], out_dir):
    """Run the experiment once per encoder vocabulary size.

    Sizes must be positive and are processed in the requested order;
    a size beyond the available vocabulary is effectively clamped by
    truncation and flagged with a warning. Returns (table, all_ok)
    where table rows mirror the per-size mean scores.
    """
    if any(s <= 0 for s in sizes):
        raise ValueError("sweep sizes must be positive")
    out = Path(out_dir)
    table = []
    all_ok = True
    for size in sizes:
        report, ok = run_experiment(cfg, out, encoder_vocab_size=size,
                                    run_name=f"{cfg.name}-vocab{size}")
        all_ok = all_ok and ok
        row = {"requested_size": size, "runs": {}}
        for representation, run in report["runs"].items():
            used = [
                rec["src_vocab_size"] for rec in run["seeds"].values() if rec["status"] == "ok"
            ]
            if used and max(used) < size:
                warnings.warn(
                    f"requested encoder vocabulary {size} exceeds the available "
                    f"{max(used)} tokens; clamped")
            row["runs"][representation] = {
                "encoder_vocab_used": max(used) if used else None,
                "mean_scores": run["mean_scores"],
            }
        table.append(row)
    with open(out / f"{cfg.name}-sweep.json", "w", encoding="utf-8") as f:
        json.dump({"name": cfg.name, "sizes": sizes, "rows": table}, f,
                  sort_keys=True, ensure_ascii=False, indent=2)
    return table, all_ok
