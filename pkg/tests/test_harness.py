import json

import numpy as np
import pytest

from conftest import make_dataset
from feedbackclf.harness import (CVReport, ExperimentConfig, ResultRecord, ResultStore, compare_to_baseline,
                                 cv_record, eval_records, format_cv_table, format_test_table, prepare_training,
                                 run_cv, run_test_eval)
from feedbackclf.normalize import default_ruleset
from feedbackclf.textmodel import TrainConfig

FAST = TrainConfig(dim=10, epochs=5, bucket_count=20_000)


def config(paths, **kw):
    base = dict(id="base", subtask="A", train=str(paths["train"]), dev=str(paths["dev"]),
                test_syn=str(paths["test_syn"]), test_dia=str(paths["test_dia"]), train_config=FAST)
    base.update(kw)
    return ExperimentConfig(**base)


class TestCV:
    def test_report(self, synthetic_splits):
        rep, prov = run_cv(config(synthetic_splits))
        assert len(rep.fold_scores) == 5
        assert 0.0 <= rep.mean <= 1.0
        assert prov["stratified"] and prov["k"] == 5
        assert prov["seeds"] == {"train": 42, "cv": 42}
        assert set(prov["corpus_sha256"]) == {"train"}

    def test_deterministic(self, synthetic_splits):
        a, pa = run_cv(config(synthetic_splits, subtask="B"))
        b, pb = run_cv(config(synthetic_splits, subtask="B"))
        assert a == b and pa == pb

    def test_std_is_sample_std(self):
        rep = CVReport("x", (0.8, 0.9, 1.0))
        assert rep.std == pytest.approx(np.std([0.8, 0.9, 1.0], ddof=1))

    def test_learns_relevance(self, synthetic_splits):
        cfg = config(synthetic_splits, train_config=FAST.replace(epochs=30, lr0=0.5))
        rep, _ = run_cv(cfg)
        assert rep.mean > 0.9


class TestTestEval:
    def test_two_splits(self, synthetic_splits):
        reports, model, prov = run_test_eval(config(synthetic_splits))
        assert set(reports) == {"test_syn", "test_dia"}
        assert reports["test_syn"].n == 120
        assert set(prov["corpus_sha256"]) == {"train", "dev", "test_syn", "test_dia"}
        table = format_test_table([("base", reports)])
        assert "Synchronic" in table.splitlines()[0]

    def test_missing_split(self, synthetic_splits):
        with pytest.raises(ValueError, match="lacks"):
            run_test_eval(config(synthetic_splits, dev=None))


class TestPrepare:
    def test_clean_then_normalize(self):
        ds = make_dataset(20, seed=5)
        dup = ds + ds
        texts, kept = prepare_training(dup, default_ruleset("lowercased"))
        assert len(kept) == len(texts) == 20
        assert all(t == t.lower() for t in texts)


class TestStore:
    def test_append_and_read(self, tmp_path):
        store = ResultStore(tmp_path / "r.jsonl")
        rep = CVReport("a", (0.8, 0.82, 0.81, 0.79, 0.8))
        store.append(cv_record(rep, {"k": 5}))
        assert store.cv_report("a") == rep
        assert json.loads((tmp_path / "r.jsonl").read_text())["provenance"] == {"k": 5}

    def test_truncated_line_ignored(self, tmp_path):
        p = tmp_path / "r.jsonl"
        store = ResultStore(p)
        store.append(ResultRecord("a", "cv", "micro_f1", 0.5, 0.0, {"fold_scores": [0.5, 0.5]}))
        with open(p, "a") as fh:
            fh.write('{"config_id": "b", "spl')
        assert [r.config_id for r in store.records()] == ["a"]

    def test_pinned_timestamp(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1500000000")
        rec = cv_record(CVReport("a", (0.5, 0.6)), {})
        assert rec.timestamp == 1500000000.0

    def test_eval_records(self, synthetic_splits):
        reports, _, prov = run_test_eval(config(synthetic_splits))
        recs = eval_records("base", reports, prov)
        assert [r.split for r in recs] == ["test_syn", "test_dia"]
        assert all(r.metric == "micro_f1" for r in recs)


class TestCompare:
    def test_star_on_significant(self, tmp_path):
        store = ResultStore(tmp_path / "r.jsonl")
        store.append(cv_record(CVReport("base", (0.70, 0.71, 0.72, 0.73, 0.74)), {}))
        store.append(cv_record(CVReport("better", (0.80, 0.81, 0.82, 0.83, 0.84)), {}))
        store.append(cv_record(CVReport("same", (0.705, 0.715, 0.725, 0.735, 0.745)), {}))
        rows = compare_to_baseline(store, "base", ["better", "same"])
        assert rows[0].p_value == pytest.approx(1 / 252)
        assert rows[0].star == "*" and rows[1].star == ""
        table = format_cv_table(rows)
        assert "82.0 ± 1.6*" in table
        assert len({len(line) for line in table.splitlines()}) == 1

    def test_missing_baseline(self, tmp_path):
        with pytest.raises(KeyError):
            compare_to_baseline(ResultStore(tmp_path / "none.jsonl"), "base", [])
