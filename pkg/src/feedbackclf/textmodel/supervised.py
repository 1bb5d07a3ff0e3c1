"""Bag-of-n-grams linear classifier trained with softmax SGD."""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Sequence

import numpy as np

from ..normalize import RuleSet
from . import _kernels
from .config import TrainConfig
from .vectors import load_vectors
from .vocab import EmbeddingTable, Vocabulary, build_vocab, featurize

logger = logging.getLogger(__name__)

MAGIC = b"FBCM"
FORMAT_VERSION = 1


class EmptyInputError(ValueError):
    pass


@dataclass
class SupervisedModel:
    vocab: Vocabulary
    input: EmbeddingTable
    output: np.ndarray
    labels: tuple[str, ...]
    train_config: TrainConfig
    ruleset: RuleSet | None = None
    epoch_losses: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ValueError("a classifier needs at least two labels")
        if self.output.shape != (len(self.labels), self.input.dim):
            raise ValueError("output matrix shape does not match labels/dim")

    def features(self, texts: Sequence[str]):
        return featurize(self.vocab, texts)

    def predict_proba_normalized(self, texts: Sequence[str]) -> np.ndarray:
        """Label distributions for texts that are already normalized."""
        ptr, rows, _ = self.features(texts)
        out = np.empty((len(texts), len(self.labels)))
        for d in range(len(texts)):
            out[d] = softmax(_kernels.predict_scores(self.input.rows, self.output, rows[ptr[d]:ptr[d + 1]]))
        return out

    def predict_labels_normalized(self, texts: Sequence[str]) -> list[str]:
        probs = self.predict_proba_normalized(texts)
        return [self.labels[i] for i in probs.argmax(axis=1)]


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def softmax_loss_and_grads(W_in: np.ndarray, W_out: np.ndarray, feats: np.ndarray,
                           target: int) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy of one example and its gradients w.r.t. both matrices.

    The model averages the input rows listed in ``feats`` (repeats count
    twice), scores labels with ``W_out`` and applies a softmax.
    """
    hidden = W_in[feats].mean(axis=0)
    p = softmax(W_out @ hidden)
    loss = -np.log(p[target])
    delta = p.copy()
    delta[target] -= 1.0
    g_out = np.outer(delta, hidden)
    g_hidden = W_out.T @ delta
    g_in = np.zeros_like(W_in)
    np.add.at(g_in, feats, g_hidden / len(feats))
    return float(loss), g_in, g_out


def _dtype(config: TrainConfig):
    return np.dtype(config.dtype)


def init_input(n_rows: int, config: TrainConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform in ``[-1/dim, 1/dim)``, drawn directly in the model dtype."""
    bound = 1.0 / config.dim
    W = rng.random((n_rows, config.dim), dtype=_dtype(config))
    W *= 2 * bound
    W -= bound
    return W


def attach_pretrained(config: TrainConfig, vectors: str | Path) -> TrainConfig:
    """Return ``config`` set to initialize word rows from a vector file."""
    with open(vectors, encoding="utf-8") as fh:
        parts = fh.readline().split()
    dim = int(parts[1]) if len(parts) == 2 and parts[1].isdigit() else None
    if dim != config.dim:
        raise ValueError(f"pretrained vectors have dim {dim}, config expects {config.dim}")
    return config.replace(pretrained=str(vectors))


def _apply_pretrained(W_in: np.ndarray, vocab: Vocabulary, path: str) -> int:
    pv, pt = load_vectors(path)
    if pt.dim != W_in.shape[1]:
        raise ValueError(f"pretrained vectors have dim {pt.dim}, model has {W_in.shape[1]}")
    hits = 0
    for i, w in enumerate(vocab.words):
        j = pv.word_to_id.get(w)
        if j is not None:
            W_in[i] = pt.rows[j]
            hits += 1
    logger.info("initialized %d/%d word rows from %s", hits, vocab.n_words, path)
    return hits


def train_supervised(texts: Sequence[str], labels: Sequence[str], config: TrainConfig,
                     label_set: Sequence[str] | None = None,
                     ruleset: RuleSet | None = None) -> SupervisedModel:
    """Train on already-normalized ``texts``.

    With ``threads=1`` the result is a pure function of the inputs and
    ``config.seed``.
    """
    if len(texts) == 0:
        raise ValueError("empty training set")
    if len(texts) != len(labels):
        raise ValueError("texts and labels differ in length")
    if any(lab is None for lab in labels):
        raise ValueError("unlabeled document in training set")
    label_set = tuple(label_set) if label_set is not None else tuple(sorted(set(labels)))
    if len(label_set) < 2:
        raise ValueError("softmax training needs at least two labels")
    index = {lab: i for i, lab in enumerate(label_set)}
    try:
        y = np.array([index[lab] for lab in labels], dtype=np.int64)
    except KeyError as err:
        raise ValueError(f"label {err.args[0]!r} not in label set") from None

    bucket = config.bucket_count if (config.word_ngrams > 1 or config.maxn > 0) else 0
    vocab = build_vocab(texts, config.min_count, bucket, config.word_ngrams, config.minn, config.maxn)
    rng = np.random.default_rng(config.seed)
    W_in = init_input(vocab.n_rows, config, rng)
    if config.pretrained:
        _apply_pretrained(W_in, vocab, config.pretrained)
    W_out = np.zeros((len(label_set), config.dim), dtype=_dtype(config))

    ptr, rows, n_tokens = featurize(vocab, texts)
    n = len(texts)
    if config.shuffle:
        orders = np.stack([rng.permutation(n) for _ in range(config.epochs)]) if config.epochs else \
            np.zeros((0, n), np.int64)
    else:
        orders = np.tile(np.arange(n, dtype=np.int64), (config.epochs, 1))

    if config.threads > 1:
        losses = _kernels.train_supervised_hogwild(W_in, W_out, ptr, rows, y, n_tokens, orders,
                                                   config.lr0, config.threads)
    else:
        losses = _kernels.train_supervised(W_in, W_out, ptr, rows, y, n_tokens, orders, config.lr0)
    return SupervisedModel(vocab, EmbeddingTable(W_in), W_out, label_set, config, ruleset, losses)


def predict(model: SupervisedModel, text: str, k: int = 1) -> list[tuple[str, float]]:
    """Top-``k`` (label, probability) for a raw text, most likely first."""
    if k < 1:
        raise ValueError("k must be >= 1")
    norm = model.ruleset.apply(text) if model.ruleset is not None else text
    if not norm.strip():
        raise EmptyInputError("empty input")
    probs = model.predict_proba_normalized([norm])[0]
    order = np.argsort(-probs, kind="stable")[:k]
    return [(model.labels[i], float(probs[i])) for i in order]


# --------------------------------------------------------------------------
# serialization: magic, version, JSON header, then raw arrays
# --------------------------------------------------------------------------

def _write_array(fh: BinaryIO, a: np.ndarray) -> None:
    np.save(fh, np.ascontiguousarray(a), allow_pickle=False)


def save_model(model: SupervisedModel, path: str | Path) -> None:
    v = model.vocab
    header = {
        "labels": list(model.labels),
        "train_config": model.train_config.as_dict(),
        "ruleset_id": model.ruleset.id if model.ruleset else None,
        "ruleset": model.ruleset.dumps() if model.ruleset else None,
        "vocab": {"words": v.words, "bucket_count": v.bucket_count, "word_ngrams": v.word_ngrams,
                  "minn": v.minn, "maxn": v.maxn},
    }
    blob = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(blob)))
        fh.write(blob)
        _write_array(fh, v.counts)
        _write_array(fh, model.input.rows)
        _write_array(fh, model.output)
        _write_array(fh, np.asarray(model.epoch_losses, dtype=np.float64))


def load_model(path: str | Path) -> SupervisedModel:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path}: not a model file")
        version, size = struct.unpack("<II", fh.read(8))
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        header = json.loads(fh.read(size).decode("utf-8"))
        counts = np.load(fh, allow_pickle=False)
        rows = np.load(fh, allow_pickle=False)
        output = np.load(fh, allow_pickle=False)
        losses = np.load(fh, allow_pickle=False)
    hv = header["vocab"]
    vocab = Vocabulary(hv["words"], counts, hv["bucket_count"], hv["word_ngrams"], hv["minn"], hv["maxn"])
    ruleset = RuleSet.loads(header["ruleset"]) if header["ruleset"] else None
    return SupervisedModel(vocab, EmbeddingTable(rows), output, tuple(header["labels"]),
                           TrainConfig.from_dict(header["train_config"]), ruleset, losses)
