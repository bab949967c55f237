"""Command-line entry point; every pipeline stage is a subcommand.

Stages exchange UTF-8 line-delimited JSON records with fields ``id``,
``text``, ``summary`` and optional ``label`` unless noted otherwise.
"""

import argparse
import json
import sys
from pathlib import Path

from .corpus import SplitSpec, filter_by_score, parse_lcsts, read_jsonl, split_train_validation, write_jsonl
from .dedup import DedupConfig, clean_part1
from .harness import ExperimentConfig, load_corpus_file, run_experiment, sweep_vocab
from .model import ModelConfig, beam_search, load_checkpoint, save_checkpoint, train
from .rouge import METRICS, evaluate_corpus
from .tokenizer import Lexicon, Vocabulary, build_vocab, char_tokenize, encode_pair_chars, encode_pair_hwc, word_segment


def _cmd_parse(args):
    with open(args.infile, encoding="utf-8") as f:
        corpus, issues = parse_lcsts(f, args.part, strict=args.strict)
    with open(args.out, "w", encoding="utf-8") as f:
        write_jsonl(corpus, f)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            for issue in issues:
                f.write(json.dumps({"line": issue.line, "message": issue.message}) + "\n")
    print(f"parsed {len(corpus)} pairs, {len(issues)} skipped", file=sys.stderr)
    return 0


def _cmd_filter(args):
    with open(args.infile, encoding="utf-8") as f:
        corpus = read_jsonl(f, "III")
    kept = filter_by_score(corpus, args.min_score)
    with open(args.out, "w", encoding="utf-8") as f:
        write_jsonl(kept, f)
    print(f"kept {len(kept)} of {len(corpus)} pairs with label >= {args.min_score}", file=sys.stderr)
    return 0


def _cmd_split(args):
    corpus = load_corpus_file(args.infile)
    train_part, valid_part = split_train_validation(corpus, SplitSpec(args.n_validation, args.seed))
    with open(args.train_out, "w", encoding="utf-8") as f:
        write_jsonl(train_part, f)
    with open(args.valid_out, "w", encoding="utf-8") as f:
        write_jsonl(valid_part, f)
    print(f"split {len(corpus)} pairs into {len(train_part)} train / {len(valid_part)} validation "
          f"(seed {args.seed})", file=sys.stderr)
    return 0


def _cmd_clean(args):
    part1 = load_corpus_file(args.part1, "I")
    part3 = load_corpus_file(args.part3, "III")
    result = clean_part1(part1, part3, DedupConfig(max_suffix_delta=args.max_suffix_delta))
    with open(args.out, "w", encoding="utf-8") as f:
        write_jsonl(result.kept, f)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            for item in result.removed:
                f.write(json.dumps({"part1_id": item.part1_id, "part3_id": item.part3_id,
                                    "reason": item.reason}, sort_keys=True) + "\n")
    print(f"kept {len(result.kept)} pairs, removed {len(result.removed)} overlapping items",
          file=sys.stderr)
    return 0


def _cmd_vocab(args):
    corpus = load_corpus_file(args.infile)
    field = args.field or ("text" if args.unit == "word" else "summary")
    if args.unit == "word":
        if not args.lexicon:
            raise ValueError("the word unit needs --lexicon")
        lex = Lexicon.from_file(args.lexicon)
        tokens = (tok for p in corpus.pairs
                  for tok in word_segment(getattr(p, "short_text" if field == "text" else "summary"), lex))
    else:
        tokens = (tok for p in corpus.pairs
                  for tok in char_tokenize(getattr(p, "short_text" if field == "text" else "summary")))
    vocab = build_vocab(tokens, args.unit, min_count=args.min_count, max_size=args.max_size)
    vocab.save(args.out)
    print(f"wrote {vocab.n_content} {args.unit} tokens (plus 4 specials) to {args.out}",
          file=sys.stderr)
    return 0


def _load_train_config(path):
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    known = {"model", "epochs", "batch_size", "learning_rate", "representation", "lexicon"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown train config keys: {sorted(unknown)}")
    return raw


def _cmd_train(args):
    cfg = _load_train_config(args.config)
    representation = args.representation or cfg.get("representation", "word_char")
    lexicon_path = args.lexicon or cfg.get("lexicon")

    src_unit = "word" if representation == "word_char" else "char"
    src_vocab = Vocabulary.load(args.src_vocab, src_unit)
    tgt_vocab = Vocabulary.load(args.tgt_vocab, "char")
    lex = Lexicon.from_file(lexicon_path) if representation == "word_char" else None
    if representation == "word_char" and lex is None:
        raise ValueError("word_char training needs --lexicon or a lexicon entry in the config")

    def encode_corpus(path):
        corpus = load_corpus_file(path)
        if representation == "word_char":
            return [encode_pair_hwc(p, lex, src_vocab, tgt_vocab) for p in corpus.pairs]
        return [encode_pair_chars(p, src_vocab, tgt_vocab) for p in corpus.pairs]

    train_pairs = encode_corpus(args.train)
    valid_pairs = encode_corpus(args.valid) if args.valid else None

    model_cfg = ModelConfig(src_vocab_size=len(src_vocab), tgt_vocab_size=len(tgt_vocab),
                            seed=args.seed, **cfg.get("model", {}))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def log(entry):
        line = f"epoch {entry['epoch']}: train_loss={entry['train_loss']:.4f}"
        if "valid_loss" in entry:
            line += f" valid_loss={entry['valid_loss']:.4f}"
        line += f" ({entry['seconds']:.1f}s)"
        print(line, file=sys.stderr)

    params, history = train(train_pairs, model_cfg, epochs=cfg.get("epochs", 5),
                            batch_size=cfg.get("batch_size", 32),
                            learning_rate=cfg.get("learning_rate", 0.15),
                            valid_pairs=valid_pairs, log_fn=log)
    save_checkpoint(params, out / "model.npz")
    src_vocab.save(out / "src_vocab.txt")
    tgt_vocab.save(out / "tgt_vocab.txt")
    meta = {"representation": representation, "lexicon": lexicon_path}
    with open(out / "meta.json", "w", encoding="utf-8") as f:
        json.dump(meta, f, sort_keys=True)
    with open(out / "train_log.jsonl", "w", encoding="utf-8") as f:
        for entry in history:
            f.write(json.dumps(entry, sort_keys=True) + "\n")
    return 0


def _cmd_summarize(args):
    model_dir = Path(args.model)
    with open(model_dir / "meta.json", encoding="utf-8") as f:
        meta = json.load(f)
    representation = meta["representation"]
    src_unit = "word" if representation == "word_char" else "char"
    src_vocab = Vocabulary.load(model_dir / "src_vocab.txt", src_unit)
    tgt_vocab = Vocabulary.load(model_dir / "tgt_vocab.txt", "char")
    lex = None
    if representation == "word_char":
        lexicon_path = args.lexicon or meta.get("lexicon")
        if not lexicon_path:
            raise ValueError("word_char summarization needs --lexicon")
        lex = Lexicon.from_file(lexicon_path)
    params = load_checkpoint(model_dir / "model.npz")

    corpus = load_corpus_file(args.infile)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for p in corpus.pairs:
            tokens = word_segment(p.short_text, lex) if representation == "word_char" \
                else char_tokenize(p.short_text)
            ids = beam_search(src_vocab.encode(tokens), params, args.beam, args.max_len)
            text = "".join(tgt_vocab.decode(ids, strip_special=True))
            out.write(json.dumps({"id": p.id, "candidate": text}, ensure_ascii=False) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def _read_texts(path, fields):
    texts = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            for field in fields:
                if field in obj:
                    texts.append(obj[field])
                    break
            else:
                raise ValueError(f"{path}: line {line_no}: none of {fields} present")
    return texts


def _cmd_eval(args):
    candidates = _read_texts(args.candidates, ("candidate", "summary"))
    references = _read_texts(args.references, ("summary", "candidate"))
    means, per_pair = evaluate_corpus(candidates, references, unit=args.unit)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            for i, scores in enumerate(per_pair):
                row = {"index": i}
                row.update({m: {"precision": scores[m].precision, "recall": scores[m].recall,
                                "f1": scores[m].f1} for m in METRICS})
                f.write(json.dumps(row, sort_keys=True) + "\n")
            f.write(json.dumps({"mean": {m: {"precision": means[m].precision,
                                             "recall": means[m].recall,
                                             "f1": means[m].f1} for m in METRICS}},
                               sort_keys=True) + "\n")
    for m in METRICS:
        print(f"{m}: P={means[m].precision:.4f} R={means[m].recall:.4f} F1={means[m].f1:.4f}")
    return 0


def _cmd_experiment(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.seeds:
        cfg.seeds = [int(s) for s in args.seeds.split(",")]
    report, all_ok = run_experiment(cfg, args.out)
    for representation, run in report["runs"].items():
        mean = run["mean_scores"]
        if mean is None:
            print(f"{representation}: all seeds failed", file=sys.stderr)
            continue
        line = " ".join(f"{m}={mean[m]['f1']:.4f}" for m in METRICS)
        print(f"{representation}: {line}")
    return 0 if all_ok else 1


def _cmd_sweep(args):
    cfg = ExperimentConfig.from_file(args.config)
    if args.seeds:
        cfg.seeds = [int(s) for s in args.seeds.split(",")]
    sizes = [int(s) for s in args.sizes.split(",")]
    table, all_ok = sweep_vocab(cfg, sizes, args.out)
    for row in table:
        for representation, cell in row["runs"].items():
            mean = cell["mean_scores"]
            if mean is None:
                print(f"size {row['requested_size']} {representation}: failed")
                continue
            line = " ".join(f"{m}={mean[m]['f1']:.4f}" for m in METRICS)
            print(f"size {row['requested_size']} {representation}: {line}")
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hwcsum", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="pseudo-XML dataset to canonical JSONL")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--part", choices=["I", "II", "III"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write skipped-record report (JSONL)")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed record")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("filter", help="keep pairs with label >= min-score")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--min-score", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("split", help="deterministic seeded train/validation split")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--n-validation", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-out", required=True)
    p.add_argument("--valid-out", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("clean", help="remove Part I items overlapping Part III")
    p.add_argument("--part1", required=True)
    p.add_argument("--part3", required=True)
    p.add_argument("--max-suffix-delta", type=int, default=15)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="write removal ledger (JSONL)")
    p.set_defaults(func=_cmd_clean)

    p = sub.add_parser("vocab", help="build a vocabulary file from a corpus")
    p.add_argument("--unit", choices=["word", "char"], required=True)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--max-size", type=int)
    p.add_argument("--field", choices=["text", "summary"],
                   help="which record field to tokenize (default: text for word, summary for char)")
    p.add_argument("--lexicon", help="word-count file for the word unit")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_vocab)

    p = sub.add_parser("train", help="train the attentional encoder-decoder")
    p.add_argument("--config", required=True, help="JSON: model/epochs/batch_size/learning_rate")
    p.add_argument("--train", required=True)
    p.add_argument("--valid")
    p.add_argument("--src-vocab", required=True)
    p.add_argument("--tgt-vocab", required=True)
    p.add_argument("--representation", choices=["char_char", "word_char"])
    p.add_argument("--lexicon")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output model directory")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("summarize", help="beam-decode summaries for a corpus")
    p.add_argument("--model", required=True, help="model directory from `train`")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--beam", type=int, default=5)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--lexicon")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_summarize)

    p = sub.add_parser("eval", help="ROUGE-1/2/L F1 against references")
    p.add_argument("--candidates", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--unit", choices=["char", "word"], default="char")
    p.add_argument("--report")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("experiment", help="full multi-seed protocol from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", help="comma-separated override, e.g. 0,1,2,3,4")
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("sweep", help="encoder vocabulary size sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--sizes", required=True, help="comma-separated sizes, ascending")
    p.add_argument("--out", required=True)
    p.add_argument("--seeds")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
