"""Domain / task adaptation at embedding scale.

* :func:`mlm_mask` is a masked-language-modeling collator (select with
  ``mask_prob``; of the selected positions 80% become the mask token, 10% a
  random non-special token and 10% stay unchanged).
* :func:`expand_vocab` appends frequent unseen corpus words with freshly
  drawn rows.
* :func:`continue_pretraining` keeps training an embedding table on task
  text, domain text or both. The masking rate carries over as the
  probability of dropping each context word (CBOW by default).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from .corpus import UnlabeledCorpus, content_hash, subsample
from .textmodel import EmbeddingTable, TrainConfig, Vocabulary, train_unsupervised

logger = logging.getLogger(__name__)

IGNORE_INDEX = -100
SOURCES = ("domain", "task", "task_plus_domain")


# --------------------------------------------------------------------------
# masking collator
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MaskingConfig:
    vocab_size: int
    mask_token_id: int
    special_token_ids: frozenset[int] = frozenset()
    mask_prob: float = 0.15
    proportions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 42

    def __post_init__(self):
        if not 0.0 <= self.mask_prob <= 1.0:
            raise ValueError(f"mask_prob must lie in [0, 1], got {self.mask_prob}")
        if abs(sum(self.proportions) - 1.0) > 1e-12 or min(self.proportions) < 0:
            raise ValueError("proportions must be non-negative and sum to 1")
        specials = frozenset(self.special_token_ids) | {self.mask_token_id}
        object.__setattr__(self, "special_token_ids", specials)
        if len(specials) >= self.vocab_size:
            raise ValueError("no non-special tokens to draw random replacements from")


@dataclass(frozen=True)
class MaskedBatch:
    input_ids: list[np.ndarray]
    labels: list[np.ndarray]
    selection_mask: list[np.ndarray]


def mlm_mask(token_ids: Sequence[int] | Sequence[Sequence[int]], config: MaskingConfig) -> MaskedBatch:
    """Corrupt one sequence or a batch of sequences for masked-token prediction."""
    if not 0.0 <= config.mask_prob <= 1.0:
        raise ValueError("mask_prob must lie in [0, 1]")
    seqs = [token_ids] if len(token_ids) == 0 or np.isscalar(token_ids[0]) else token_ids
    rng = np.random.default_rng(config.seed)
    special = np.fromiter(config.special_token_ids, dtype=np.int64)
    pool = np.setdiff1d(np.arange(config.vocab_size, dtype=np.int64), special)
    p_mask, p_random, _ = config.proportions

    inputs, labels, selected = [], [], []
    for seq in seqs:
        ids = np.asarray(seq, dtype=np.int64)
        eligible = ~np.isin(ids, special)
        sel = (rng.random(len(ids)) < config.mask_prob) & eligible
        u = rng.random(len(ids))
        out = ids.copy()
        to_mask = sel & (u < p_mask)
        to_random = sel & (u >= p_mask) & (u < p_mask + p_random)
        out[to_mask] = config.mask_token_id
        out[to_random] = pool[rng.integers(0, len(pool), size=int(to_random.sum()))]
        lab = np.full(len(ids), IGNORE_INDEX, dtype=np.int64)
        lab[sel] = ids[sel]
        inputs.append(out)
        labels.append(lab)
        selected.append(sel)
    return MaskedBatch(inputs, labels, selected)


# --------------------------------------------------------------------------
# vocabulary expansion
# --------------------------------------------------------------------------

def expand_vocab(vocab: Vocabulary, table: EmbeddingTable, corpus: Sequence[str],
                 max_new: int = 20_000, seed: int = 42) -> tuple[Vocabulary, EmbeddingTable]:
    """Append up to ``max_new`` of the most frequent corpus words unknown to ``vocab``.

    Existing ids keep their rows bit for bit. New rows are normal with the
    per-component standard deviation of the existing word rows. Bucket rows
    (if any) follow the word rows and are carried over unchanged.
    """
    counts = Counter()
    first = {}
    for line in corpus:
        for tok in line.split():
            if tok in vocab.word_to_id:
                continue
            if tok not in first:
                first[tok] = len(first)
            counts[tok] += 1
    new = sorted(counts, key=lambda w: (-counts[w], first[w]))[:max_new]
    if not new:
        return vocab, table

    words = table.rows[:vocab.n_words]
    std = words.std(axis=0) if vocab.n_words > 1 else np.full(table.dim, 1.0 / table.dim)
    rng = np.random.default_rng(seed)
    fresh = (rng.standard_normal((len(new), table.dim)) * std).astype(table.rows.dtype)
    rows = np.vstack([words, fresh, table.rows[vocab.n_words:]])
    output = None
    if table.output is not None:
        output = np.vstack([table.output, np.zeros((len(new), table.dim), table.output.dtype)])
    logger.info("expanded vocabulary by %d words", len(new))
    return vocab.with_words(new, [counts[w] for w in new]), EmbeddingTable(rows, output)


# --------------------------------------------------------------------------
# continued pretraining
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AdaptPlan:
    source: str = "task_plus_domain"
    domain_subset: int | None = None  # None = all lines
    mask_prob: float = 0.15
    expand_vocab: bool = False
    max_new_words: int = 20_000
    epochs: int = 5
    max_seq_len: int = 512
    model: str = "cbow"
    seed: int = 42

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if not 0.0 <= self.mask_prob <= 1.0:
            raise ValueError("mask_prob must lie in [0, 1]")

    @property
    def name(self) -> str:
        parts = {"domain": ["Domain"], "task": ["Task"], "task_plus_domain": ["Task", "Domain"]}[self.source]
        if self.source != "task" and self.domain_subset is not None:
            n = self.domain_subset
            parts[-1] += f" ({n // 1000}K)" if n % 1000 == 0 and n else f" ({n})"
        if self.expand_vocab:
            parts.append("Vocab")
        if self.mask_prob != 0.15:
            parts.append(f"{round(self.mask_prob * 100)}% Mask")
        return " + ".join(parts)

    def dumps(self) -> str:
        lines = []
        for k, v in asdict(self).items():
            lines.append(f"{k}={'all' if v is None else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "AdaptPlan":
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in types:
                raise ValueError(f"unknown plan key {key!r}")
            kw[key] = _coerce(key, val)
        return cls(**kw)


def _coerce(key: str, val: str):
    if key == "domain_subset":
        return None if val in ("all", "None", "") else int(val)
    if key in ("mask_prob",):
        return float(val)
    if key == "expand_vocab":
        if val.lower() not in ("true", "false", "1", "0"):
            raise ValueError(f"expand_vocab must be a boolean, got {val!r}")
        return val.lower() in ("true", "1")
    if key in ("max_new_words", "epochs", "max_seq_len", "seed"):
        return int(val)
    return val


def adaptation_matrix(seed: int = 42) -> list[AdaptPlan]:
    """The adaptation grid: Domain (+/-30% mask, +/-vocab), Task (+/-30% mask),
    Task + 100K / 200K domain lines (+/-30% mask)."""
    plans = []
    for vocab_flag in (False, True):
        for mask in (0.15, 0.30):
            plans.append(AdaptPlan("domain", None, mask, vocab_flag, seed=seed))
    for mask in (0.15, 0.30):
        plans.append(AdaptPlan("task", None, mask, seed=seed))
    for subset in (100_000, 200_000):
        for mask in (0.15, 0.30):
            plans.append(AdaptPlan("task_plus_domain", subset, mask, seed=seed))
    return plans


@dataclass
class AdaptResult:
    vocab: Vocabulary
    table: EmbeddingTable
    provenance: dict = field(default_factory=dict)
    epoch_losses: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _truncate(lines: Sequence[str], max_len: int) -> list[str]:
    out = []
    for line in lines:
        toks = line.split()
        for i in range(0, max(len(toks), 1), max_len):
            chunk = toks[i:i + max_len]
            if chunk:
                out.append(" ".join(chunk))
    return out


def build_training_corpus(plan: AdaptPlan, task_corpus: UnlabeledCorpus | None,
                          domain_corpus: UnlabeledCorpus | None) -> list[str]:
    lines: list[str] = []
    if plan.source in ("task", "task_plus_domain"):
        if task_corpus is None or len(task_corpus) == 0:
            raise ValueError(f"plan source {plan.source!r} needs a task corpus")
        lines.extend(task_corpus.lines)
    if plan.source in ("domain", "task_plus_domain"):
        if domain_corpus is None or len(domain_corpus) == 0:
            raise ValueError(f"plan source {plan.source!r} needs a domain corpus")
        dom = domain_corpus if plan.domain_subset is None else subsample(domain_corpus, plan.domain_subset, plan.seed)
        lines.extend(dom.lines)
    # sequences longer than max_seq_len tokens are split into chunks
    return _truncate(lines, plan.max_seq_len)


def continue_pretraining(plan: AdaptPlan, base: tuple[Vocabulary, EmbeddingTable],
                         task_corpus: UnlabeledCorpus | None = None,
                         domain_corpus: UnlabeledCorpus | None = None,
                         config: TrainConfig | None = None) -> AdaptResult:
    """Continue training ``base`` on the corpus described by ``plan``.

    Domain lines are used raw (whitespace tokenized only). The inputs are
    not modified.
    """
    vocab, table = base
    lines = build_training_corpus(plan, task_corpus, domain_corpus)
    cfg = (config or TrainConfig.unsupervised(dim=table.dim)).replace(
        epochs=plan.epochs, context_drop=plan.mask_prob, model=plan.model, seed=plan.seed, dim=table.dim)
    n_before = vocab.n_words
    if plan.expand_vocab:
        vocab, table = expand_vocab(vocab, table, lines, plan.max_new_words, plan.seed)
    vocab, table, losses = train_unsupervised(lines, cfg, init=(vocab, table))
    provenance = {
        "plan": plan.name,
        "source": plan.source,
        "domain_subset": plan.domain_subset,
        "mask_prob": plan.mask_prob,
        "mask_analog": "context_drop",
        "expand_vocab": plan.expand_vocab,
        "new_words": vocab.n_words - n_before,
        "epochs": plan.epochs,
        "max_seq_len": plan.max_seq_len,
        "model": plan.model,
        "seeds": {"plan": plan.seed, "train": cfg.seed},
        "n_lines": len(lines),
        "corpus_sha256": content_hash(lines),
    }
    return AdaptResult(vocab, table, provenance, losses)
