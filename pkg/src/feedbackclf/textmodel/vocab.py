"""Vocabulary, embedding table and document featurization.

Row layout of every input matrix: rows ``[0, n_words)`` belong to vocabulary
words, rows ``[n_words, n_words + bucket_count)`` are hash buckets shared by
word n-grams and character n-grams.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import hashing


class EmptyVocabularyError(ValueError):
    pass


@dataclass
class Vocabulary:
    words: list[str]
    counts: np.ndarray
    bucket_count: int = 0
    word_ngrams: int = 1
    minn: int = 0
    maxn: int = 0
    word_to_id: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.word_to_id = {w: i for i, w in enumerate(self.words)}
        if len(self.word_to_id) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        self._subwords = None

    @property
    def n_words(self) -> int:
        return len(self.words)

    @property
    def n_rows(self) -> int:
        return self.n_words + self.bucket_count

    @property
    def subwords_enabled(self) -> bool:
        return self.bucket_count > 0 and self.maxn > 0

    def __len__(self):
        return self.n_words

    def __contains__(self, word):
        return word in self.word_to_id

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (self.words == other.words and np.array_equal(self.counts, other.counts)
                and (self.bucket_count, self.word_ngrams, self.minn, self.maxn)
                == (other.bucket_count, other.word_ngrams, other.minn, other.maxn))

    def bucket_ids(self, hashes: np.ndarray) -> np.ndarray:
        return (hashes % np.uint64(self.bucket_count)).astype(np.int64) + self.n_words

    def subword_rows(self, words: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
        """CSR (ptr, rows) of character n-gram bucket rows for ``words``."""
        if not self.subwords_enabled:
            return np.zeros(len(words) + 1, np.int64), np.zeros(0, np.int64)
        buf, off = hashing.pack(words)
        h, ptr = hashing.char_ngram_hashes(buf, off, self.minn, self.maxn)
        return ptr, self.bucket_ids(h)

    def word_subwords(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached CSR subword rows for every vocabulary word."""
        if self._subwords is None:
            self._subwords = self.subword_rows(self.words)
        return self._subwords

    def with_words(self, new_words: Sequence[str], new_counts: Sequence[int]) -> "Vocabulary":
        return Vocabulary(self.words + list(new_words),
                          np.concatenate([self.counts, np.asarray(new_counts, np.int64)]),
                          self.bucket_count, self.word_ngrams, self.minn, self.maxn)


def count_words(texts: Iterable[str]) -> tuple[Counter, dict[str, int]]:
    counts = Counter()
    first = {}
    for text in texts:
        for tok in text.split():
            if tok not in first:
                first[tok] = len(first)
            counts[tok] += 1
    return counts, first


def build_vocab(texts: Iterable[str], min_count: int = 1, bucket_count: int = 0,
                word_ngrams: int = 1, minn: int = 0, maxn: int = 0) -> Vocabulary:
    """Whitespace-token vocabulary ordered by (count desc, first occurrence asc)."""
    counts, first = count_words(texts)
    if not counts:
        raise EmptyVocabularyError("empty corpus")
    kept = [w for w, c in counts.items() if c >= min_count]
    if not kept:
        raise EmptyVocabularyError(f"no word reaches min_count={min_count}")
    kept.sort(key=lambda w: (-counts[w], first[w]))
    if bucket_count == 0 and (word_ngrams > 1 or maxn > 0):
        raise ValueError("word n-grams and subwords need bucket_count > 0")
    return Vocabulary(kept, [counts[w] for w in kept], bucket_count, word_ngrams, minn, maxn)


@dataclass
class EmbeddingTable:
    """Input vectors (word rows then bucket rows); ``output`` is kept when the
    table comes out of unsupervised training so it can be continued."""

    rows: np.ndarray
    output: np.ndarray | None = None

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] <= 0:
            raise ValueError("rows must be a 2-D matrix with dim > 0")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self):
        return self.rows.shape[0]

    def copy(self) -> "EmbeddingTable":
        return EmbeddingTable(self.rows.copy(), None if self.output is None else self.output.copy())

    def word_vectors(self, vocab: Vocabulary) -> np.ndarray:
        """Per-word vectors: word row averaged with its subword rows."""
        vecs = self.rows[:vocab.n_words].astype(np.float64)
        if vocab.subwords_enabled:
            ptr, sub = vocab.word_subwords()
            for i in range(vocab.n_words):
                s = sub[ptr[i]:ptr[i + 1]]
                vecs[i] = (vecs[i] + self.rows[s].sum(axis=0)) / (1 + len(s))
        return vecs


def featurize(vocab: Vocabulary, texts: Sequence[str]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Feature rows for each text in CSR layout.

    Returns ``(ptr, rows, n_tokens)``: in-vocabulary word ids (plus their
    subword rows when enabled), then word n-gram bucket rows.
    """
    tokens = [t.split() for t in texts]
    n_tokens = np.array([len(t) for t in tokens], dtype=np.int64)
    sub_ptr, sub_rows = vocab.word_subwords() if vocab.subwords_enabled else (None, None)

    if vocab.word_ngrams > 1:
        flat = [w for toks in tokens for w in toks]
        buf, tok_off = hashing.pack(flat)
        doc_off = np.zeros(len(tokens) + 1, dtype=np.int64)
        np.cumsum(n_tokens, out=doc_off[1:])
        ng_hash, ng_ptr = hashing.word_ngram_hashes(buf, tok_off, doc_off, vocab.word_ngrams)
        ng_rows = vocab.bucket_ids(ng_hash)
    else:
        ng_ptr = np.zeros(len(tokens) + 1, dtype=np.int64)
        ng_rows = np.zeros(0, dtype=np.int64)

    parts = []
    ptr = np.zeros(len(tokens) + 1, dtype=np.int64)
    w2i = vocab.word_to_id
    for d, toks in enumerate(tokens):
        feats = []
        for tok in toks:
            wid = w2i.get(tok, -1)
            if wid >= 0:
                feats.append(wid)
                if sub_ptr is not None:
                    feats.extend(sub_rows[sub_ptr[wid]:sub_ptr[wid + 1]].tolist())
            elif sub_ptr is not None:
                p, r = vocab.subword_rows([tok])
                feats.extend(r.tolist())
        arr = np.asarray(feats, dtype=np.int64)
        arr = np.concatenate([arr, ng_rows[ng_ptr[d]:ng_ptr[d + 1]]])
        parts.append(arr)
        ptr[d + 1] = ptr[d] + len(arr)
    rows = np.concatenate(parts) if parts else np.zeros(0, np.int64)
    return ptr, rows, n_tokens
