import io
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_dataset
from feedbackclf.corpus import (Document, LabeledDataset, RecordError, UnlabeledCorpus, class_distribution,
                                clean, content_hash, parse_tsv, read_lines, read_tsv, relabel, serialize_tsv,
                                stratified_kfold, stratified_kfold_indices, subsample, write_tsv)

ROW = "http://ex.org/1\tDie Bahn kommt zu spät\ttrue\tnegative\n"


class TestParse:
    def test_single_record(self):
        ds = parse_tsv(io.StringIO(ROW), "training")
        assert len(ds) == 1
        d = ds[0]
        assert (d.id, d.text, d.relevance, d.sentiment) == ("http://ex.org/1", "Die Bahn kommt zu spät", True, "negative")
        assert d.label("relevance") == "true"
        assert ds.split_name == "training"

    def test_aspect_column_tolerated(self):
        ds = parse_tsv(io.StringIO(ROW.rstrip("\n") + "\tAllgemein#Haupt:negative\n"))
        assert ds[0].aspects == "Allgemein#Haupt:negative"
        assert serialize_tsv(ds).endswith("\tAllgemein#Haupt:negative\n")

    @pytest.mark.parametrize("line", [
        "only\tthree\ttrue\n",
        "http://x\ttext\tyes\tneutral\n",
        "http://x\ttext\ttrue\tNeutral\n",
        "\ttext\ttrue\tneutral\n",
    ])
    def test_strict_rejects(self, line):
        with pytest.raises(RecordError) as exc:
            parse_tsv(io.StringIO(ROW + line))
        assert exc.value.line_no == 2

    def test_lenient_collects_errors(self):
        ds = parse_tsv(io.StringIO(ROW + "broken\n" + ROW), strict=False)
        assert len(ds) == 2
        assert [e.line_no for e in ds.errors] == [2]

    def test_lenient_skips_header(self):
        ds = parse_tsv(io.StringIO("id\ttext\trelevance\tsentiment\n" + ROW), strict=False)
        assert len(ds) == 1 and ds.errors == ()

    def test_crlf_and_blank_lines(self):
        ds = parse_tsv(io.StringIO(ROW.replace("\n", "\r\n") + "\n"))
        assert ds[0].sentiment == "negative"

    def test_empty_text_is_kept_by_parser(self):
        ds = parse_tsv(io.StringIO("http://x\t\tfalse\tneutral\n"))
        assert ds[0].text == ""


texts = st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc"), blacklist_characters="\t\n\r\x85  \x1c\x1d\x1e"), max_size=40)
docs = st.builds(
    Document,
    id=st.integers(0, 10**6).map(lambda i: f"http://ex.org/{i}"),
    text=texts,
    relevance=st.booleans(),
    sentiment=st.sampled_from(["neutral", "negative", "positive"]),
)


class TestRoundTrip:
    @given(st.lists(docs, max_size=20))
    @settings(max_examples=100)
    def test_serialize_parse(self, documents):
        ds = LabeledDataset(tuple(documents))
        assert parse_tsv(io.StringIO(serialize_tsv(ds))) == ds

    def test_file_round_trip(self, tmp_path):
        ds = make_dataset(50, seed=3)
        write_tsv(ds, tmp_path / "a.tsv")
        assert read_tsv(tmp_path / "a.tsv") == ds


class TestClean:
    def test_removes_duplicates_and_blanks(self):
        ds = LabeledDataset((
            Document("a", "x", True, "neutral"),
            Document("b", "  ", True, "neutral"),
            Document("c", "x", False, "negative"),
            Document("d", "y", True, "positive"),
        ))
        assert [d.id for d in clean(ds)] == ["a", "d"]

    @given(st.lists(docs, max_size=30))
    @settings(max_examples=60)
    def test_idempotent(self, documents):
        once = clean(LabeledDataset(tuple(documents)))
        assert clean(once) == once
        assert len({d.text for d in once}) == len(once)


class TestDistribution:
    def test_ordered_counts(self):
        ds = make_dataset(200, seed=1)
        dist = class_distribution(ds, "sentiment")
        assert list(dist) == ["neutral", "negative", "positive"]
        assert sum(dist.values()) == 200
        assert list(class_distribution(ds, "relevance")) == ["true", "false"]


class TestStratifiedKFold:
    @given(st.lists(st.sampled_from("abc"), min_size=15, max_size=120), st.integers(2, 5), st.integers(0, 99))
    @settings(max_examples=80)
    def test_partition_properties(self, labels, k, seed):
        counts = Counter(labels)
        if min(counts.values()) < k:
            return
        folds = stratified_kfold_indices(labels, k, seed)
        vals = [v for _, v in folds]
        # validation folds partition the indices
        assert sorted(i for v in vals for i in v) == list(range(len(labels)))
        for tr, va in folds:
            assert set(tr).isdisjoint(va) and len(tr) + len(va) == len(labels)
        sizes = [len(v) for v in vals]
        assert max(sizes) - min(sizes) <= 1
        for lab in counts:
            per = [sum(labels[i] == lab for i in v) for v in vals]
            assert max(per) - min(per) <= 1

    def test_deterministic(self):
        labels = list("aabbbccccc" * 5)
        assert stratified_kfold_indices(labels, 5, 7) == stratified_kfold_indices(labels, 5, 7)
        assert stratified_kfold_indices(labels, 5, 7) != stratified_kfold_indices(labels, 5, 8)

    def test_fold_sizes_for_training_split_size(self):
        labels = ["true"] * 16_988 + ["false"] * 3_953
        sizes = sorted(len(v) for _, v in stratified_kfold_indices(labels, 5, 42))
        assert sizes == [4188, 4188, 4188, 4188, 4189]

    def test_dataset_wrapper(self):
        ds = make_dataset(100, seed=2)
        for tr, va in stratified_kfold(ds, 5, "relevance", 42):
            assert len(tr) + len(va) == 100

    def test_too_few_members(self):
        with pytest.raises(ValueError, match="fewer than k"):
            stratified_kfold_indices(["a"] * 10 + ["b"], 5, 0)


class TestUnlabeled:
    def test_subsample_order_and_size(self):
        corpus = UnlabeledCorpus(tuple(f"line {i}" for i in range(100)), "t")
        sub = subsample(corpus, 10, seed=1)
        assert len(sub) == 10
        idx = [int(s.split()[1]) for s in sub]
        assert idx == sorted(idx)
        assert subsample(corpus, 10, seed=1) == sub
        assert subsample(corpus, 500, seed=1) is corpus

    def test_read_lines(self, tmp_path):
        p = tmp_path / "d.txt"
        p.write_text("a b\nc\n", encoding="utf-8")
        assert read_lines(p).lines == ("a b", "c")

    def test_content_hash_stable(self):
        assert content_hash(["a", "b"]) == content_hash(["a", "b"])
        assert content_hash(["a", "b"]) != content_hash(["ab"])

    def test_relabel(self):
        ds = make_dataset(3)
        out = relabel(ds, ["x", "y", "z"])
        assert out.texts == ["x", "y", "z"]
        assert out.labels("sentiment") == ds.labels("sentiment")
