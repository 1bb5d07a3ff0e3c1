import io
import json

import pytest

from feedbackclf.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, read_config_file


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture()
def conf(tmp_path, synthetic_splits):
    p = tmp_path / "base.conf"
    p.write_text(
        "# baseline, small and fast\n"
        f"train = {synthetic_splits['train']}\n"
        f"dev = {synthetic_splits['dev']}\n"
        f"test_syn = {synthetic_splits['test_syn']}\n"
        f"test_dia = {synthetic_splits['test_dia']}\n"
        "bucket = 20000   # fewer buckets\n"
        "dim = 10\n"
        "epochs = 5\n",
        encoding="utf-8")
    return p


class TestUsage:
    def test_no_arguments(self):
        code, out, err = run([])
        assert code == EXIT_USAGE
        assert "usage" in err and out == ""

    def test_unknown_flag(self):
        assert run(["cv", "--bogus"])[0] == EXIT_USAGE

    def test_unknown_config_key(self, tmp_path):
        p = tmp_path / "c.conf"
        p.write_text("dimm = 3\n")
        code, _, err = run(["cv", "--config", str(p)])
        assert code == EXIT_USAGE and "dimm" in err

    def test_bad_value(self, conf):
        assert run(["cv", "--config", str(conf), "--dim", "ten"])[0] == EXIT_USAGE

    def test_help(self):
        assert run(["cv", "--help"])[0] == EXIT_OK


class TestConfigFile:
    def test_comments_and_relative_paths(self, tmp_path):
        p = tmp_path / "c.conf"
        p.write_text("# comment\n\ntrain = data/train.tsv  # trailing\nseed=7\n")
        assert read_config_file(p) == {"train": str(tmp_path / "data/train.tsv"), "seed": "7"}

    def test_precedence(self, conf, tmp_path, monkeypatch):
        store = tmp_path / "r.jsonl"
        monkeypatch.setenv("FEEDBACKCLF_SEED", "3")
        run(["cv", "--config", str(conf), "--store", str(store), "--id", "env"])
        run(["cv", "--config", str(conf), "--store", str(store), "--id", "flag", "--seed", "5"])
        recs = [json.loads(line) for line in store.read_text().splitlines()]
        assert recs[0]["provenance"]["seeds"]["train"] == 3
        assert recs[1]["provenance"]["seeds"]["train"] == 5


class TestCommands:
    def test_ingest(self, synthetic_splits):
        code, out, _ = run(["ingest", "--input", str(synthetic_splits["train"]), "--clean"])
        kv = dict(line.split("=") for line in out.splitlines())
        assert code == EXIT_OK and kv["documents"] == "400"
        assert int(kv["relevance.true"]) + int(kv["relevance.false"]) == int(kv["after_clean"])

    def test_ingest_data_error(self, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("x\ty\n")
        code, out, err = run(["ingest", "--input", str(bad)])
        assert code == EXIT_DATA and "line 1" in err and out == ""
        assert run(["ingest", "--input", str(bad), "--lenient"])[0] == EXIT_OK

    def test_missing_file(self, tmp_path):
        assert run(["stats", "--input", str(tmp_path / "nope.tsv")])[0] == EXIT_DATA

    def test_stats_table(self, synthetic_splits):
        code, out, _ = run(["stats", "--input", str(synthetic_splits["train"]), "--normalize", "--lowercase"])
        lines = out.splitlines()
        assert code == EXIT_OK and len(lines) == 2
        assert lines[0].split()[:4] == ["Subset", "Unigrams", "Bigrams", "Trigrams"]

    def test_preprocess_and_rules(self, synthetic_splits, tmp_path):
        code, out, _ = run(["preprocess", "--dump-rules", "--lowercase"])
        assert code == EXIT_OK and "# casing lowercased" in out
        rules = tmp_path / "rules.txt"
        rules.write_text(out)
        _, a, _ = run(["preprocess", "--input", str(synthetic_splits["dev"]), "--lowercase"])
        _, b, _ = run(["preprocess", "--input", str(synthetic_splits["dev"]), "--rules", str(rules)])
        assert a == b and "@" not in a

    def test_train_predict(self, conf, tmp_path):
        model = tmp_path / "m.bin"
        code, out, _ = run(["train", "--config", str(conf), "--subtask", "B", "--output", str(model)])
        assert code == EXIT_OK and "labels=neutral,negative,positive" in out
        code, out, _ = run(["predict", "--model", str(model), "--text", "Zug wieder Verspätung", "-k", "3"])
        fields = out.split()
        assert code == EXIT_OK and len(fields) == 6
        assert run(["predict", "--model", str(model), "--text", ",;"])[0] == EXIT_DATA

    def test_evaluate_model(self, conf, tmp_path, synthetic_splits):
        model = tmp_path / "m.bin"
        run(["train", "--config", str(conf), "--output", str(model)])
        code, out, _ = run(["evaluate", "--model", str(model), "--input", str(synthetic_splits["test_syn"])])
        assert code == EXIT_OK and "test_syn.micro_f1=" in out

    def test_evaluate_config(self, conf):
        code, out, _ = run(["evaluate", "--config", str(conf)])
        assert code == EXIT_OK and "Diachronic" in out

    def test_pretrain_adapt_cv_compare(self, conf, tmp_path, synthetic_splits):
        vec, adapted, store = tmp_path / "v.vec", tmp_path / "a.vec", tmp_path / "r.jsonl"
        common = ["--dim", "10", "--bucket", "2000", "--epochs", "2", "--min-count", "1"]
        assert run(["pretrain", "--input", str(synthetic_splits["domain"]), "--output", str(vec)] + common)[0] == 0
        code, out, _ = run(["adapt", "--base", str(vec), "--task", str(synthetic_splits["train"]),
                            "--domain", str(synthetic_splits["domain"]), "--mask-prob", "0.3",
                            "--subset", "100", "--output", str(adapted)])
        assert code == EXIT_OK
        assert json.loads(out)["plan"] == "Task + Domain (100) + 30% Mask"
        assert run(["cv", "--config", str(conf), "--store", str(store), "--id", "base"])[0] == 0
        assert run(["cv", "--config", str(conf), "--store", str(store), "--id", "vec",
                    "--vectors", str(adapted)])[0] == 0
        code, out, _ = run(["compare", "--store", str(store), "--baseline", "base", "--candidates", "vec"])
        assert code == EXIT_OK and "vec.p=" in out

    def test_mask(self, tmp_path):
        p = tmp_path / "t.txt"
        p.write_text("a b c d e f g h\n")
        code, out, _ = run(["mask", "--input", str(p), "--mask-prob", "1.0"])
        rec = json.loads(out)
        assert code == EXIT_OK
        assert rec["tokens"][0] == "[CLS]" and rec["tokens"][-1] == "[SEP]"
        assert rec["labels"][0] == -100 and all(x != -100 for x in rec["labels"][1:-1])


class TestDeterminism:
    def test_cv_output_byte_identical(self, conf, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        outs = []
        for i in range(2):
            store = tmp_path / f"r{i}.jsonl"
            code, out, _ = run(["cv", "--subtask", "A", "--config", str(conf), "--seed", "42",
                                "--store", str(store)])
            assert code == EXIT_OK
            outs.append((out, store.read_bytes()))
        assert outs[0] == outs[1]
