"""Corpus statistics: unique n-gram counts and mean document length."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable


@dataclass(frozen=True)
class CorpusStats:
    unique_unigrams: int
    unique_bigrams: int
    unique_trigrams: int
    mean_doc_length: float
    mean_doc_length_chars: float
    doc_count: int

    def as_dict(self) -> dict:
        return asdict(self)


def compute_stats(texts: Iterable[str]) -> CorpusStats:
    """Count unique 1/2/3-grams over whitespace tokens of already normalized text.

    N-grams never cross document boundaries; uniqueness is corpus-wide.
    """
    grams = (set(), set(), set())
    n_docs = 0
    n_tokens = 0
    n_chars = 0
    for text in texts:
        toks = text.split()
        n_docs += 1
        n_tokens += len(toks)
        n_chars += len(text)
        for n, seen in enumerate(grams, start=1):
            seen.update(zip(*(toks[i:] for i in range(n))))
    return CorpusStats(
        unique_unigrams=len(grams[0]),
        unique_bigrams=len(grams[1]),
        unique_trigrams=len(grams[2]),
        mean_doc_length=n_tokens / n_docs if n_docs else 0.0,
        mean_doc_length_chars=n_chars / n_docs if n_docs else 0.0,
        doc_count=n_docs,
    )


_COLUMNS = ("Subset", "Unigrams", "Bigrams", "Trigrams", "Mean length (tokens)", "Mean length (chars)")


def format_table(rows: list[tuple[str, CorpusStats]]) -> str:
    """Aligned plain-text table, one row per named subset."""
    body = [[name, f"{s.unique_unigrams:,}", f"{s.unique_bigrams:,}", f"{s.unique_trigrams:,}",
             f"{s.mean_doc_length:.1f}", f"{s.mean_doc_length_chars:.1f}"] for name, s in rows]
    widths = [max(len(r[i]) for r in [list(_COLUMNS)] + body) for i in range(len(_COLUMNS))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(_COLUMNS, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in body]
    return "\n".join(lines)


def format_records(name: str, stats: CorpusStats) -> str:
    return "\n".join(f"{name}.{k}={v}" for k, v in stats.as_dict().items())
