"""Loading, cleaning and splitting GermEval-style feedback data.

The labelled data is a headerless TSV with one document per line::

    <id (URL)> \\t <text> \\t <relevance: true|false> \\t <sentiment: neutral|negative|positive>

The official files carry a fifth column with aspect annotations; it is kept
verbatim so that cleaned datasets can be written back unchanged.
"""

from __future__ import annotations

import hashlib
import io
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

logger = logging.getLogger(__name__)

SENTIMENTS = ("neutral", "negative", "positive")
SPLITS = ("training", "development", "test_syn", "test_dia", "custom")
TASKS = ("relevance", "sentiment")

_RELEVANCE_LITERALS = {"true": True, "false": False}


class DataError(ValueError):
    """Raised for malformed input data."""


class RecordError(DataError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
        self.message = message


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    relevance: bool | None = None
    sentiment: str | None = None
    aspects: str | None = None

    def __post_init__(self):
        if not self.id:
            raise DataError("document id must be non-empty")
        if self.sentiment is not None and self.sentiment not in SENTIMENTS:
            raise DataError(f"unknown sentiment {self.sentiment!r}")

    def label(self, task: str) -> str | None:
        """Return the label for ``task`` as a string, or None if absent."""
        if task == "relevance":
            return None if self.relevance is None else ("true" if self.relevance else "false")
        if task == "sentiment":
            return self.sentiment
        raise ValueError(f"unknown task {task!r}")


@dataclass(frozen=True)
class LabeledDataset:
    documents: tuple[Document, ...] = ()
    split_name: str = "custom"
    errors: tuple[RecordError, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.split_name not in SPLITS:
            raise ValueError(f"unknown split {self.split_name!r}")
        object.__setattr__(self, "documents", tuple(self.documents))

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]

    @property
    def texts(self) -> list[str]:
        return [d.text for d in self.documents]

    def labels(self, task: str) -> list[str]:
        out = []
        for i, d in enumerate(self.documents):
            lab = d.label(task)
            if lab is None:
                raise DataError(f"document {i} ({d.id}) has no {task} label")
            out.append(lab)
        return out

    def subset(self, indices: Iterable[int]) -> "LabeledDataset":
        return LabeledDataset(tuple(self.documents[i] for i in indices), self.split_name)

    def with_documents(self, documents: Iterable[Document]) -> "LabeledDataset":
        return LabeledDataset(tuple(documents), self.split_name)

    def __add__(self, other: "LabeledDataset") -> "LabeledDataset":
        return LabeledDataset(self.documents + other.documents, "custom")


@dataclass(frozen=True)
class UnlabeledCorpus:
    lines: tuple[str, ...] = ()
    source_tag: str = "unlabeled"

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))

    def __len__(self):
        return len(self.lines)

    def __iter__(self):
        return iter(self.lines)


def _parse_line(line: str, line_no: int) -> Document:
    fields = line.split("\t")
    if len(fields) not in (4, 5):
        raise RecordError(line_no, f"expected 4 tab-separated fields, got {len(fields)}")
    doc_id, text, relevance, sentiment = fields[:4]
    aspects = fields[4] if len(fields) == 5 else None
    if not doc_id:
        raise RecordError(line_no, "empty document id")
    if relevance not in _RELEVANCE_LITERALS:
        raise RecordError(line_no, f"unknown relevance literal {relevance!r}")
    if sentiment not in SENTIMENTS:
        raise RecordError(line_no, f"unknown sentiment literal {sentiment!r}")
    return Document(doc_id, text, _RELEVANCE_LITERALS[relevance], sentiment, aspects)


def _looks_like_header(line: str) -> bool:
    first = line.split("\t", 1)[0].strip().lower()
    return not (first.startswith("http") or first.startswith("www.") or "/" in first)


def parse_tsv(stream: TextIO | Iterable[str], split_name: str = "custom",
              strict: bool = True) -> LabeledDataset:
    """Parse a GermEval TSV stream into a :class:`LabeledDataset`.

    In strict mode the first malformed record raises :class:`RecordError`.
    In lenient mode malformed records are skipped and collected in
    ``dataset.errors``; a leading header line is skipped silently.
    """
    docs = []
    errors = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line:
            continue
        try:
            docs.append(_parse_line(line, line_no))
        except RecordError as err:
            if strict:
                raise
            if line_no == 1 and _looks_like_header(line):
                logger.info("skipping header line")
                continue
            logger.warning("skipping record: %s", err)
            errors.append(err)
    return LabeledDataset(tuple(docs), split_name, tuple(errors))


def read_tsv(path: str | Path, split_name: str = "custom", strict: bool = True) -> LabeledDataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_tsv(fh, split_name=split_name, strict=strict)


def serialize_tsv(dataset: LabeledDataset) -> str:
    """Inverse of :func:`parse_tsv` (one record per line, trailing newline)."""
    buf = io.StringIO()
    for d in dataset.documents:
        rel = "" if d.relevance is None else ("true" if d.relevance else "false")
        fields = [d.id, d.text, rel, d.sentiment or ""]
        if d.aspects is not None:
            fields.append(d.aspects)
        buf.write("\t".join(fields))
        buf.write("\n")
    return buf.getvalue()


def write_tsv(dataset: LabeledDataset, path: str | Path) -> None:
    Path(path).write_text(serialize_tsv(dataset), encoding="utf-8")


def clean(dataset: LabeledDataset) -> LabeledDataset:
    """Drop empty/whitespace-only texts and exact duplicate texts (first kept)."""
    seen = set()
    kept = []
    for d in dataset.documents:
        if not d.text.strip():
            continue
        if d.text in seen:
            continue
        seen.add(d.text)
        kept.append(d)
    return LabeledDataset(tuple(kept), dataset.split_name)


def class_distribution(dataset: LabeledDataset, task: str) -> dict[str, int]:
    classes = ("true", "false") if task == "relevance" else SENTIMENTS
    counts = Counter(dataset.labels(task))
    return {c: counts.get(c, 0) for c in classes}


def stratified_kfold(dataset: LabeledDataset, k: int, label: str,
                     seed: int) -> list[tuple[LabeledDataset, LabeledDataset]]:
    """Split into ``k`` (train, validation) pairs stratified by ``label``.

    Each class is shuffled with a seeded generator and dealt round-robin over
    the folds; the dealing position carries over from one class to the next,
    so fold sizes as well as per-class counts differ by at most one.
    """
    return [(dataset.subset(tr), dataset.subset(va))
            for tr, va in stratified_kfold_indices(dataset.labels(label), k, seed)]


def stratified_kfold_indices(labels: Sequence[str], k: int,
                             seed: int) -> list[tuple[list[int], list[int]]]:
    if k < 2:
        raise ValueError("k must be >= 2")
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    for lab, members in by_class.items():
        if len(members) < k:
            raise DataError(f"class {lab!r} has {len(members)} members, fewer than k={k}")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=np.int64)
    pos = 0
    for lab in sorted(by_class):
        members = np.asarray(by_class[lab])
        for idx in members[rng.permutation(len(members))]:
            fold_of[idx] = pos % k
            pos += 1

    folds = []
    for f in range(k):
        val = np.flatnonzero(fold_of == f).tolist()
        train = np.flatnonzero(fold_of != f).tolist()
        folds.append((train, val))
    return folds


def read_lines(path: str | Path, source_tag: str | None = None) -> UnlabeledCorpus:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    return UnlabeledCorpus(tuple(lines), source_tag or Path(path).name)


def subsample(corpus: UnlabeledCorpus, n: int, seed: int) -> UnlabeledCorpus:
    """Sample ``min(n, len(corpus))`` lines without replacement, keeping input order."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n >= len(corpus):
        return corpus
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(corpus), size=n, replace=False))
    return UnlabeledCorpus(tuple(corpus.lines[i] for i in idx), f"{corpus.source_tag}[{n}]")


def content_hash(data: str | bytes | Iterable[str]) -> str:
    """sha256 hex digest used to tag provenance records."""
    h = hashlib.sha256()
    if isinstance(data, str):
        h.update(data.encode("utf-8"))
    elif isinstance(data, bytes):
        h.update(data)
    else:
        for s in data:
            h.update(s.encode("utf-8"))
            h.update(b"\n")
    return h.hexdigest()


def relabel(dataset: LabeledDataset, texts: Sequence[str]) -> LabeledDataset:
    """Return a copy of ``dataset`` with document texts replaced, labels kept."""
    if len(texts) != len(dataset):
        raise ValueError("length mismatch")
    return dataset.with_documents(replace(d, text=t) for d, t in zip(dataset.documents, texts))
