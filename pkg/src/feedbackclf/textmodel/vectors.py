"""Word vectors in the common text format.

First line ``<n_words> <dim>``, then one line per word: the word followed by
``dim`` space-separated decimals. Values are written with enough digits to
round-trip float32 exactly.
"""

from __future__ import annotations

from pathlib import Path
from typing import TextIO

import numpy as np

from .vocab import EmbeddingTable, Vocabulary


class VectorFormatError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def save_vectors(table: EmbeddingTable, vocab: Vocabulary, sink: TextIO | str | Path) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            return save_vectors(table, vocab, fh)
    vecs = table.word_vectors(vocab)
    sink.write(f"{vocab.n_words} {table.dim}\n")
    for word, v in zip(vocab.words, vecs):
        sink.write(word + " " + " ".join(f"{x:.9g}" for x in v) + "\n")


def load_vectors(source: TextIO | str | Path) -> tuple[Vocabulary, EmbeddingTable]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return load_vectors(fh)
    header = source.readline()
    parts = header.split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise VectorFormatError(1, f"malformed header {header.strip()!r}")
    n, dim = int(parts[0]), int(parts[1])
    if dim <= 0:
        raise VectorFormatError(1, "dimension must be positive")
    words = []
    rows = np.empty((n, dim), dtype=np.float32)
    for i in range(n):
        line_no = i + 2
        line = source.readline()
        if not line:
            raise VectorFormatError(line_no, f"expected {n} vectors, file ends after {i}")
        fields = line.rstrip("\n").rstrip(" ").split(" ")
        if len(fields) != dim + 1:
            raise VectorFormatError(line_no, f"expected {dim} values, got {len(fields) - 1}")
        try:
            rows[i] = [float(x) for x in fields[1:]]
        except ValueError as err:
            raise VectorFormatError(line_no, str(err)) from None
        words.append(fields[0])
    if len(set(words)) != len(words):
        raise VectorFormatError(0, "duplicate words")
    vocab = Vocabulary(words, np.zeros(n, dtype=np.int64))
    return vocab, EmbeddingTable(rows)
