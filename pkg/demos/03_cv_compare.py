"""Cross-validate two configurations and star a significant improvement.

The comparison is a one-sided rank-sum test over the per-fold scores,
exactly as the ``compare`` subcommand renders it.
"""

import tempfile
from pathlib import Path

from synthetic import write_splits

from feedbackclf.harness import (ExperimentConfig, ResultStore, compare_to_baseline, cv_record,
                                 format_cv_table, run_cv)
from feedbackclf.textmodel import TrainConfig

with tempfile.TemporaryDirectory() as tmp:
    paths = write_splits(Path(tmp))
    store = ResultStore(Path(tmp) / "results.jsonl")
    candidates = {
        "unigrams-1ep": TrainConfig(bucket_count=50_000, word_ngrams=1, epochs=1),
        "baseline": TrainConfig(bucket_count=50_000),
    }
    for name, tc in candidates.items():
        report, provenance = run_cv(ExperimentConfig(name, subtask="A", train=str(paths["train"]), train_config=tc))
        store.append(cv_record(report, provenance))
        print(f"{name:14} folds " + " ".join(f"{s:.3f}" for s in report.fold_scores))

    rows = compare_to_baseline(store, "unigrams-1ep", ["baseline"])
    print()
    print(format_cv_table(rows))
    print(f"\np = {rows[0].p_value:.4f} (the smallest attainable with 5 vs 5 folds is 1/252)")
