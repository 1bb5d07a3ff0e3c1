"""Train the bag-of-n-grams classifier, predict, and score the test splits."""

import tempfile
from pathlib import Path

from synthetic import write_splits

from feedbackclf.harness import ExperimentConfig, format_test_table, run_test_eval
from feedbackclf.textmodel import TrainConfig, load_model, predict, save_model

with tempfile.TemporaryDirectory() as tmp:
    paths = write_splits(Path(tmp))
    # fewer buckets keep the demo light; dim, lr, n-gram order and epochs stay at their defaults
    config = ExperimentConfig("baseline-B", subtask="B", train_config=TrainConfig(bucket_count=100_000),
                              **{k: str(paths[k]) for k in ("train", "dev", "test_syn", "test_dia")})
    reports, model, provenance = run_test_eval(config)
    print(format_test_table([(config.id, reports)]))
    print("corpus hashes:", {k: v[:12] for k, v in provenance["corpus_sha256"].items()})

    save_model(model, Path(tmp) / "model.bin")
    model = load_model(Path(tmp) / "model.bin")
    for text in ["Zug hat wieder Verspätung :(", "Danke, super freundlicher Schaffner!", "ICE nach Berlin"]:
        top = predict(model, text, k=3)
        print(f"{text!r:42} -> " + ", ".join(f"{lab} {p:.2f}" for lab, p in top))
