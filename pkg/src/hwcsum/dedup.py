"""Overlap cleaning: drop Part I items that near-duplicate Part III items.

An item is considered overlapping when its summary is exactly equal
(after normalization) to a Part III summary and its article is either
identical or differs only by a short suffix, e.g. a trailing newspaper
name. Matching is exact-summary indexed, so the pass is linear in the
corpus sizes.
"""

import unicodedata
from dataclasses import dataclass, field

from .corpus import CorpusPart, DocumentPair


@dataclass
class DedupConfig:
    max_suffix_delta: int = 15
    require_equal_summary: bool = True

    def __post_init__(self):
        if self.max_suffix_delta < 0:
            raise ValueError("max_suffix_delta must be >= 0")


@dataclass
class RemovedItem:
    part1_id: int
    part3_id: int
    reason: str


@dataclass
class CleanResult:
    kept: CorpusPart
    removed: list[RemovedItem] = field(default_factory=list)


def normalize_for_match(text: str) -> str:
    """NFC normalization with every Unicode whitespace character removed."""
    return "".join(ch for ch in unicodedata.normalize("NFC", text) if not ch.isspace())


def _articles_overlap(a: str, b: str, max_delta: int):
    """Equal articles, or the shorter a prefix of the longer within max_delta chars."""
    if a == b:
        return True, "article_equal"
    short, long = (a, b) if len(a) <= len(b) else (b, a)
    delta = len(long) - len(short)
    if delta <= max_delta and long.startswith(short):
        return True, f"article_prefix_delta={delta}"
    return False, ""


def is_overlapping(a: DocumentPair, b: DocumentPair, cfg: DedupConfig) -> bool:
    """True iff the two pairs count as the same item under cfg."""
    if cfg.require_equal_summary:
        if normalize_for_match(a.summary) != normalize_for_match(b.summary):
            return False
    hit, _ = _articles_overlap(
        normalize_for_match(a.short_text), normalize_for_match(b.short_text), cfg.max_suffix_delta
    )
    return hit


def clean_part1(part1: CorpusPart, part3: CorpusPart, cfg: DedupConfig | None = None) -> CleanResult:
    """Remove every Part I pair that overlaps any Part III pair.

    Part III is indexed by normalized summary, so each Part I record
    only gets article-compared against the (few) candidates sharing its
    summary. The first matching witness, in Part III file order, is
    recorded. With require_equal_summary=False there is no summary key
    to index on and the scan degrades to candidate-checking every
    Part III record.
    """
    cfg = cfg or DedupConfig()

    index: dict[str, list[tuple[int, str]]] = {}
    all_candidates: list[tuple[int, str]] = []
    for p3 in part3.pairs:
        entry = (p3.id, normalize_for_match(p3.short_text))
        all_candidates.append(entry)
        index.setdefault(normalize_for_match(p3.summary), []).append(entry)

    kept: list[DocumentPair] = []
    removed: list[RemovedItem] = []
    for p1 in part1.pairs:
        if cfg.require_equal_summary:
            candidates = index.get(normalize_for_match(p1.summary), ())
        else:
            candidates = all_candidates
        article = normalize_for_match(p1.short_text) if candidates else ""
        witness = None
        for p3_id, p3_article in candidates:
            hit, reason = _articles_overlap(article, p3_article, cfg.max_suffix_delta)
            if hit:
                witness = RemovedItem(p1.id, p3_id, reason)
                break
        if witness is None:
            kept.append(p1)
        else:
            removed.append(witness)

    return CleanResult(CorpusPart(part1.part, kept), removed)
