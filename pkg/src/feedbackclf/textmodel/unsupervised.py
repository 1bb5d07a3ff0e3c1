"""Skip-gram / CBOW embedding training with negative sampling and subwords."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from . import _kernels
from .config import TrainConfig
from .supervised import init_input
from .vocab import EmbeddingTable, Vocabulary, build_vocab

logger = logging.getLogger(__name__)

NEG_TABLE_SIZE = 1_000_000
NEG_POWER = 0.75


def negative_table(counts: np.ndarray, size: int = NEG_TABLE_SIZE) -> np.ndarray:
    """Word ids repeated in proportion to ``count ** 0.75``."""
    weights = np.asarray(counts, dtype=np.float64) ** NEG_POWER
    if weights.sum() == 0:
        weights = np.ones(len(counts))
    reps = np.maximum(1, np.round(weights / weights.sum() * size)).astype(np.int64)
    return np.repeat(np.arange(len(counts), dtype=np.int64), reps)


def keep_probabilities(counts: np.ndarray, t: float) -> np.ndarray:
    """Frequent-word subsampling: keep with ``sqrt(t/f) + t/f`` (capped at 1)."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if t <= 0 or total == 0:
        return np.ones(len(counts))
    f = np.where(counts > 0, counts / total, 1.0)
    return np.minimum(1.0, np.sqrt(t / f) + t / f)


def encode_corpus(vocab: Vocabulary, texts: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Vocabulary ids per text in CSR layout; unknown words are dropped."""
    w2i = vocab.word_to_id
    ptr = np.zeros(len(texts) + 1, dtype=np.int64)
    ids = []
    for d, text in enumerate(texts):
        row = [w2i[t] for t in text.split() if t in w2i]
        ids.extend(row)
        ptr[d + 1] = ptr[d] + len(row)
    return ptr, np.asarray(ids, dtype=np.int64)


def train_unsupervised(texts: Sequence[str], config: TrainConfig,
                       init: tuple[Vocabulary, EmbeddingTable] | None = None,
                       ) -> tuple[Vocabulary, EmbeddingTable, np.ndarray]:
    """Train (or continue training) input vectors on raw whitespace tokens.

    Without ``init`` a vocabulary is built from ``texts`` and rows are drawn
    uniformly from ``[-1/dim, 1/dim]``. With ``init`` its vocabulary and
    matrices are reused as-is; words of ``texts`` missing from it are
    ignored (expand the vocabulary first to learn them). Returns
    ``(vocab, table, epoch_losses)``; the inputs are never modified.
    """
    if not any(t.strip() for t in texts):
        raise ValueError("empty corpus")
    if init is None:
        bucket = config.bucket_count if config.maxn > 0 else 0
        vocab = build_vocab(texts, config.min_count, bucket, 1, config.minn, config.maxn)
        W_in = init_input(vocab.n_rows, config, np.random.default_rng(config.seed))
        W_out = np.zeros((vocab.n_words, config.dim), dtype=config.dtype)
    else:
        vocab, table = init
        if table.dim != config.dim:
            raise ValueError(f"init table has dim {table.dim}, config expects {config.dim}")
        W_in = table.rows.copy()
        W_out = (table.output.copy() if table.output is not None
                 else np.zeros((vocab.n_words, table.dim), dtype=W_in.dtype))
        if W_out.shape[0] < vocab.n_words:
            W_out = np.vstack([W_out, np.zeros((vocab.n_words - W_out.shape[0], table.dim), W_out.dtype)])

    ptr, ids = encode_corpus(vocab, texts)
    if len(ids) == 0 or config.epochs == 0:
        return vocab, EmbeddingTable(W_in, W_out), np.zeros(config.epochs)

    # counts of a reused vocabulary may be zero (loaded vectors): fall back to corpus counts
    counts = vocab.counts.astype(np.float64)
    if counts.sum() == 0:
        counts = np.bincount(ids, minlength=vocab.n_words).astype(np.float64)
    sub_ptr, sub_rows = vocab.word_subwords() if vocab.subwords_enabled else (
        np.zeros(vocab.n_words + 1, np.int64), np.zeros(0, np.int64))
    # negatives are drawn among the words this corpus actually contains
    present = np.bincount(ids, minlength=vocab.n_words) > 0
    neg_counts = np.where(present, np.maximum(counts, 1), 0)
    neg = config.neg if present.sum() >= 2 else 0
    losses = _kernels.train_unsupervised(
        W_in, W_out, ptr, ids, sub_ptr, sub_rows, keep_probabilities(counts, config.sampling_t),
        negative_table(neg_counts), config.epochs, config.lr0, config.window, neg,
        config.model == "cbow", config.context_drop, config.seed)
    return vocab, EmbeddingTable(W_in, W_out), losses
