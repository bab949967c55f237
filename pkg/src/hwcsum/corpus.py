"""Corpus ingestion: pseudo-XML parsing, label filtering, seeded splits.

Datasets arrive as blocks of the form

    <doc id=0>
    <human_label>5</human_label>
    <summary>...</summary>
    <short_text>...</short_text>
    </doc>

where the label line is optional (Part I has none). The canonical
interchange format between pipeline stages is line-delimited JSON with
fields ``id``, ``text``, ``summary`` and optional ``label``.
"""

import json
import re
import unicodedata
from dataclasses import dataclass, field

from .rng import MT19937

VALID_PARTS = ("I", "II", "III")
LABELED_PARTS = ("II", "III")

_DOC_OPEN = re.compile(r"^\s*<doc\s+id=(\d+)\s*>\s*$")
_DOC_CLOSE = re.compile(r"^\s*</doc>\s*$")
_INLINE_TAG = re.compile(r"^\s*<(human_label|summary|short_text)>(.*?)</\1>\s*$", re.S)
_BLOCK_OPEN = re.compile(r"^\s*<(human_label|summary|short_text)>\s*$")


def normalize_text(text: str) -> str:
    """NFC normalization plus leading/trailing whitespace strip."""
    return unicodedata.normalize("NFC", text).strip()


@dataclass
class DocumentPair:
    """One (article, headline) record, optionally human-scored 1..5."""

    id: int
    short_text: str
    summary: str
    human_label: int | None = None

    def validate(self):
        if not self.short_text or not self.summary:
            raise ValueError(f"pair id={self.id}: empty text or summary")
        if self.human_label is not None and self.human_label not in (1, 2, 3, 4, 5):
            raise ValueError(f"pair id={self.id}: human_label {self.human_label} not in 1..5")


@dataclass
class CorpusPart:
    part: str
    pairs: list[DocumentPair] = field(default_factory=list)

    def __post_init__(self):
        if self.part not in VALID_PARTS:
            raise ValueError(f"part must be one of {VALID_PARTS}, got {self.part!r}")

    def __len__(self):
        return len(self.pairs)


@dataclass
class ParseIssue:
    """One skipped record: where it went wrong and why."""

    line: int
    message: str


class ParseError(Exception):
    pass


def _finish_record(part, rec, line_no, issues, pairs, strict):
    def fail(msg):
        if strict:
            raise ParseError(f"line {line_no}: {msg}")
        issues.append(ParseIssue(line_no, msg))

    for key in ("summary", "short_text"):
        if key not in rec:
            fail(f"doc id={rec.get('id')}: missing <{key}>")
            return
    label = None
    if "human_label" in rec:
        raw = rec["human_label"].strip()
        if not raw.isdigit() or int(raw) not in (1, 2, 3, 4, 5):
            fail(f"doc id={rec.get('id')}: bad human_label {raw!r}")
            return
        label = int(raw)
    elif part in LABELED_PARTS:
        fail(f"doc id={rec.get('id')}: part {part} record has no <human_label>")
        return
    pair = DocumentPair(
        id=rec["id"],
        short_text=normalize_text(rec["short_text"]),
        summary=normalize_text(rec["summary"]),
        human_label=label,
    )
    try:
        pair.validate()
    except ValueError as exc:
        fail(str(exc))
        return
    pairs.append(pair)


def parse_lcsts(stream, part: str, strict: bool = False):
    """Parse a pseudo-XML dataset stream into a CorpusPart.

    Returns (CorpusPart, issues). Malformed blocks are skipped and
    reported as ParseIssue entries unless strict, in which case the
    first defect raises ParseError. Pair order is file order. Content
    may sit on the tag line or on its own lines before the closing tag;
    multi-line content is joined with single spaces.
    """
    if part not in VALID_PARTS:
        raise ValueError(f"part must be one of {VALID_PARTS}, got {part!r}")

    pairs: list[DocumentPair] = []
    issues: list[ParseIssue] = []
    rec = None
    rec_line = 0
    open_tag = None
    content: list[str] = []

    for line_no, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.rstrip("\n")

        if open_tag is not None:
            if re.match(rf"^\s*</{open_tag}>\s*$", line):
                rec[open_tag] = " ".join(content)
                open_tag = None
                content = []
            else:
                stripped = line.strip()
                if stripped:
                    content.append(stripped)
            continue

        m = _DOC_OPEN.match(line)
        if m:
            if rec is not None:
                msg = f"doc id={rec.get('id')}: unterminated block"
                if strict:
                    raise ParseError(f"line {rec_line}: {msg}")
                issues.append(ParseIssue(rec_line, msg))
            rec = {"id": int(m.group(1))}
            rec_line = line_no
            continue

        if rec is None:
            if line.strip():
                msg = f"content outside <doc> block: {line.strip()[:40]!r}"
                if strict:
                    raise ParseError(f"line {line_no}: {msg}")
                issues.append(ParseIssue(line_no, msg))
            continue

        if _DOC_CLOSE.match(line):
            _finish_record(part, rec, rec_line, issues, pairs, strict)
            rec = None
            continue

        m = _INLINE_TAG.match(line)
        if m:
            rec[m.group(1)] = m.group(2).strip()
            continue

        m = _BLOCK_OPEN.match(line)
        if m:
            open_tag = m.group(1)
            content = []
            continue

        if line.strip():
            msg = f"doc id={rec.get('id')}: unrecognized line {line.strip()[:40]!r}"
            if strict:
                raise ParseError(f"line {line_no}: {msg}")
            issues.append(ParseIssue(line_no, msg))
            rec = None  # resync at the next <doc>

    if rec is not None:
        msg = f"doc id={rec.get('id')}: unterminated block at end of input"
        if strict:
            raise ParseError(f"line {rec_line}: {msg}")
        issues.append(ParseIssue(rec_line, msg))

    return CorpusPart(part, pairs), issues


def write_lcsts(corpus: CorpusPart, stream):
    """Serialize back to the pseudo-XML block format, one tag per line."""
    for p in corpus.pairs:
        stream.write(f"<doc id={p.id}>\n")
        if p.human_label is not None:
            stream.write(f"<human_label>{p.human_label}</human_label>\n")
        stream.write(f"<summary>{p.summary}</summary>\n")
        stream.write(f"<short_text>{p.short_text}</short_text>\n")
        stream.write("</doc>\n")


def read_jsonl(stream, part: str = "I") -> CorpusPart:
    pairs = []
    for line_no, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {line_no}: invalid JSON ({exc})") from None
        pair = DocumentPair(
            id=int(obj["id"]),
            short_text=normalize_text(obj["text"]),
            summary=normalize_text(obj["summary"]),
            human_label=obj.get("label"),
        )
        pair.validate()
        pairs.append(pair)
    return CorpusPart(part, pairs)


def write_jsonl(corpus: CorpusPart, stream):
    for p in corpus.pairs:
        obj = {"id": p.id, "text": p.short_text, "summary": p.summary}
        if p.human_label is not None:
            obj["label"] = p.human_label
        stream.write(json.dumps(obj, ensure_ascii=False) + "\n")


def filter_by_score(corpus: CorpusPart, min_score: int) -> CorpusPart:
    """Keep pairs with human_label >= min_score, order preserved."""
    kept = []
    for p in corpus.pairs:
        if p.human_label is None:
            raise ValueError(f"pair id={p.id} has no human_label; cannot filter by score")
        if p.human_label >= min_score:
            kept.append(p)
    return CorpusPart(corpus.part, kept)


@dataclass
class SplitSpec:
    n_validation: int = 1000
    seed: int = 0


def split_train_validation(corpus: CorpusPart, spec: SplitSpec):
    """Deterministic seeded split into (train, validation).

    The validation set is the first n_validation positions of a
    Fisher-Yates shuffle of the pair indices driven by MT19937(seed)
    with rejection-bounded sampling; both outputs keep the original
    corpus order. Fully determined by (input order, seed).
    """
    n = len(corpus.pairs)
    if spec.n_validation >= n:
        raise ValueError(
            f"n_validation={spec.n_validation} must be smaller than the corpus size {n}"
        )
    indices = list(range(n))
    MT19937(spec.seed).shuffle(indices)
    chosen = set(indices[: spec.n_validation])
    train = [p for i, p in enumerate(corpus.pairs) if i not in chosen]
    valid = [p for i, p in enumerate(corpus.pairs) if i in chosen]
    return CorpusPart(corpus.part, train), CorpusPart(corpus.part, valid)
