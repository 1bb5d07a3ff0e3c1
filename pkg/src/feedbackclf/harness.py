"""Experiment orchestration: cross-validation, test evaluation, adaptation
runs, an append-only JSONL results store and comparison tables."""

from __future__ import annotations

import json
import logging
import os
import statistics
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .adapt import AdaptPlan, AdaptResult, continue_pretraining
from .corpus import (SENTIMENTS, LabeledDataset, UnlabeledCorpus, clean, content_hash, read_lines,
                     read_tsv, stratified_kfold_indices)
from .metrics import EvalReport, micro_scores
from .normalize import RuleSet, default_ruleset
from .stattest import wilcoxon_rank_sum
from .textmodel import (SupervisedModel, TrainConfig, attach_pretrained, load_vectors, save_vectors,
                        train_supervised)

logger = logging.getLogger(__name__)

SUBTASKS = {"A": "relevance", "B": "sentiment"}
LABEL_SETS = {"relevance": ("true", "false"), "sentiment": SENTIMENTS}


@dataclass(frozen=True)
class ExperimentConfig:
    id: str
    subtask: str = "A"
    train: str | None = None
    dev: str | None = None
    test_syn: str | None = None
    test_dia: str | None = None
    train_config: TrainConfig = field(default_factory=TrainConfig)
    casing: str = "lowercased"
    pretrained_vectors: str | None = None
    adapt_plan: AdaptPlan | None = None
    base_vectors: str | None = None
    domain_corpus: str | None = None
    cv_seed: int = 42
    k: int = 5

    def __post_init__(self):
        if self.subtask not in SUBTASKS:
            raise ValueError(f"subtask must be A or B, got {self.subtask!r}")

    @property
    def task(self) -> str:
        return SUBTASKS[self.subtask]

    @property
    def label_set(self) -> tuple[str, ...]:
        return LABEL_SETS[self.task]

    @property
    def ruleset(self) -> RuleSet:
        return default_ruleset(self.casing)

    def seeds(self) -> dict:
        seeds = {"train": self.train_config.seed, "cv": self.cv_seed}
        if self.adapt_plan is not None:
            seeds["adapt"] = self.adapt_plan.seed
        return seeds


@dataclass(frozen=True)
class CVReport:
    config_id: str
    fold_scores: tuple[float, ...]
    mean: float = field(init=False)
    std: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "fold_scores", tuple(float(s) for s in self.fold_scores))
        object.__setattr__(self, "mean", statistics.fmean(self.fold_scores))
        std = statistics.stdev(self.fold_scores) if len(self.fold_scores) > 1 else 0.0
        object.__setattr__(self, "std", std)


# --------------------------------------------------------------------------
# data preparation
# --------------------------------------------------------------------------

def load_split(path: str | os.PathLike, split_name: str) -> LabeledDataset:
    return read_tsv(path, split_name=split_name, strict=True)


def prepare_training(dataset: LabeledDataset, ruleset: RuleSet) -> tuple[list[str], LabeledDataset]:
    """Clean (duplicates, empty texts) and normalize; returns texts + kept docs."""
    kept = clean(dataset)
    return [ruleset.apply(d.text) for d in kept.documents], kept


def _fit(texts, labels, config: ExperimentConfig, train_config: TrainConfig) -> SupervisedModel:
    return train_supervised(texts, labels, train_config, config.label_set, config.ruleset)


def evaluate_model(model: SupervisedModel, dataset: LabeledDataset, task: str) -> EvalReport:
    texts = [model.ruleset.apply(d.text) if model.ruleset else d.text for d in dataset.documents]
    preds = model.predict_labels_normalized(texts)
    return micro_scores(preds, dataset.labels(task), model.labels)


# --------------------------------------------------------------------------
# adaptation
# --------------------------------------------------------------------------

def _adapted_vectors(config: ExperimentConfig, task_texts: Sequence[str],
                     workdir: str) -> tuple[str, AdaptResult]:
    plan = config.adapt_plan
    if config.base_vectors is None:
        raise ValueError("an adaptation plan needs base_vectors")
    base = load_vectors(config.base_vectors)
    domain = read_lines(config.domain_corpus) if config.domain_corpus else None
    task = UnlabeledCorpus(tuple(task_texts), "task")
    result = continue_pretraining(plan, base, task, domain)
    path = os.path.join(workdir, "adapted.vec")
    save_vectors(result.table, result.vocab, path)
    return path, result


def _effective_train_config(config: ExperimentConfig, task_texts: Sequence[str],
                            workdir: str) -> tuple[TrainConfig, dict]:
    tc = config.train_config
    provenance: dict = {}
    if config.adapt_plan is not None:
        path, result = _adapted_vectors(config, task_texts, workdir)
        tc = attach_pretrained(tc, path)
        provenance["adapt"] = result.provenance
    elif config.pretrained_vectors:
        tc = attach_pretrained(tc, config.pretrained_vectors)
        provenance["pretrained_sha256"] = _file_hash(config.pretrained_vectors)
    return tc, provenance


def _file_hash(path: str | None) -> str | None:
    if path is None:
        return None
    return content_hash(Path(path).read_bytes())


def _corpus_hashes(config: ExperimentConfig, names: Iterable[str]) -> dict:
    return {n: _file_hash(getattr(config, n)) for n in names if getattr(config, n)}


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def run_cv(config: ExperimentConfig, k: int | None = None,
           dataset: LabeledDataset | None = None) -> tuple[CVReport, dict]:
    """Stratified k-fold CV on the training split; returns report and provenance."""
    k = k or config.k
    if dataset is None:
        if config.train is None:
            raise ValueError("config has no training split")
        dataset = load_split(config.train, "training")
    texts, kept = prepare_training(dataset, config.ruleset)
    labels = kept.labels(config.task)
    with tempfile.TemporaryDirectory() as tmp:
        tc, prov = _effective_train_config(config, texts, tmp)
        scores = []
        for fold, (tr, va) in enumerate(stratified_kfold_indices(labels, k, config.cv_seed)):
            model = _fit([texts[i] for i in tr], [labels[i] for i in tr], config, tc)
            preds = model.predict_labels_normalized([texts[i] for i in va])
            rep = micro_scores(preds, [labels[i] for i in va], config.label_set)
            logger.info("%s fold %d/%d micro-F1 %.4f", config.id, fold + 1, k, rep.micro_f1)
            scores.append(rep.micro_f1)
    prov.update(seeds=config.seeds(), stratified=True, k=k, n_docs=len(texts),
                corpus_sha256=_corpus_hashes(config, ["train", "base_vectors", "domain_corpus"]) or content_hash(texts))
    return CVReport(config.id, tuple(scores)), prov


def run_test_eval(config: ExperimentConfig) -> tuple[dict[str, EvalReport], SupervisedModel, dict]:
    """Train on training + development, evaluate on both test splits."""
    missing = [n for n in ("train", "dev", "test_syn", "test_dia") if getattr(config, n) is None]
    if missing:
        raise ValueError(f"config lacks splits: {', '.join(missing)}")
    train = load_split(config.train, "training") + load_split(config.dev, "development")
    texts, kept = prepare_training(train, config.ruleset)
    labels = kept.labels(config.task)
    with tempfile.TemporaryDirectory() as tmp:
        tc, prov = _effective_train_config(config, texts, tmp)
        model = _fit(texts, labels, config, tc)
    reports = {}
    for split in ("test_syn", "test_dia"):
        reports[split] = evaluate_model(model, load_split(getattr(config, split), split), config.task)
    prov.update(seeds=config.seeds(), n_train=len(texts),
                corpus_sha256=_corpus_hashes(config, ["train", "dev", "test_syn", "test_dia", "base_vectors", "domain_corpus"]))
    return reports, model, prov


def adapt_then_finetune(plan: AdaptPlan | None, dataset: LabeledDataset, config: ExperimentConfig,
                        eval_dataset: LabeledDataset | None = None):
    """continue_pretraining -> attach_pretrained -> train -> evaluate.

    Evaluates on ``eval_dataset`` when given, otherwise runs CV on
    ``dataset``. ``plan=None`` is exactly the baseline run.
    """
    cfg = ExperimentConfig(**{**_shallow(config), "adapt_plan": plan})
    if eval_dataset is None:
        return run_cv(cfg, dataset=dataset)
    texts, kept = prepare_training(dataset, cfg.ruleset)
    with tempfile.TemporaryDirectory() as tmp:
        tc, prov = _effective_train_config(cfg, texts, tmp)
        model = _fit(texts, kept.labels(cfg.task), cfg, tc)
    prov["seeds"] = cfg.seeds()
    return model, evaluate_model(model, eval_dataset, cfg.task), prov


def _shallow(config: ExperimentConfig) -> dict:
    return {f: getattr(config, f) for f in config.__dataclass_fields__}


# --------------------------------------------------------------------------
# results store
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ResultRecord:
    config_id: str
    split: str
    metric: str
    value: float
    timestamp: float = 0.0
    extra: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, ensure_ascii=False)


def now() -> float:
    """Record timestamp; ``SOURCE_DATE_EPOCH`` pins it for reproducible output."""
    pinned = os.environ.get("SOURCE_DATE_EPOCH")
    return float(pinned) if pinned else round(time.time(), 3)


class ResultStore:
    """Append-only newline-delimited JSON records; one writer at a time."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)

    def append(self, record: ResultRecord) -> None:
        line = record.to_json() + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    def records(self) -> list[ResultRecord]:
        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.endswith("\n") and line.strip():
                    out.append(ResultRecord(**json.loads(line)))
        return out

    def cv_report(self, config_id: str) -> CVReport:
        found = [r for r in self.records() if r.config_id == config_id and r.split == "cv"]
        if not found:
            raise KeyError(f"no CV fold scores for {config_id!r}")
        return CVReport(config_id, tuple(found[-1].extra["fold_scores"]))


def cv_record(report: CVReport, provenance: dict) -> ResultRecord:
    return ResultRecord(report.config_id, "cv", "micro_f1", report.mean, now(),
                        {"fold_scores": list(report.fold_scores), "std": report.std}, provenance)


def eval_records(config_id: str, reports: dict[str, EvalReport], provenance: dict) -> list[ResultRecord]:
    return [ResultRecord(config_id, split, "micro_f1", rep.micro_f1, now(),
                         {"n": rep.n, "confusion": rep.confusion.tolist()}, provenance)
            for split, rep in reports.items()]


# --------------------------------------------------------------------------
# comparison tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    config_id: str
    mean: float
    std: float
    p_value: float | None
    star: str


def compare_to_baseline(store: ResultStore, baseline_id: str, candidate_ids: Sequence[str],
                        alpha: float = 0.05) -> list[ComparisonRow]:
    """One-sided rank-sum test of each candidate's fold scores against the baseline's."""
    base = store.cv_report(baseline_id)
    rows = []
    for cid in candidate_ids:
        rep = store.cv_report(cid)
        res = wilcoxon_rank_sum(rep.fold_scores, base.fold_scores, "greater", alpha)
        rows.append(ComparisonRow(cid, rep.mean, rep.std, res.p_one_sided, res.star))
    return rows


def format_cv_table(rows: Sequence[ComparisonRow | CVReport], header: str = "micro F1 %") -> str:
    """Plain-text table: ``System | mean ± std`` with a star when significant."""
    cells = []
    for r in rows:
        star = getattr(r, "star", "")
        cid = r.config_id
        cells.append((cid, f"{100 * r.mean:.1f} ± {100 * r.std:.1f}{star}"))
    w0 = max([len("System")] + [len(c[0]) for c in cells])
    w1 = max([len(header)] + [len(c[1]) for c in cells])
    lines = [f"{'System'.ljust(w0)}  {header.rjust(w1)}"]
    lines += [f"{c[0].ljust(w0)}  {c[1].rjust(w1)}" for c in cells]
    return "\n".join(lines)


def format_test_table(rows: Sequence[tuple[str, dict[str, EvalReport]]]) -> str:
    """Plain-text table: ``System | Synchronic | Diachronic`` in percent."""
    w0 = max([len("System")] + [len(name) for name, _ in rows])
    lines = [f"{'System'.ljust(w0)}  {'Synchronic':>10}  {'Diachronic':>10}"]
    for name, reps in rows:
        syn = f"{100 * reps['test_syn'].micro_f1:.1f}" if "test_syn" in reps else "-"
        dia = f"{100 * reps['test_dia'].micro_f1:.1f}" if "test_dia" in reps else "-"
        lines.append(f"{name.ljust(w0)}  {syn:>10}  {dia:>10}")
    return "\n".join(lines)

