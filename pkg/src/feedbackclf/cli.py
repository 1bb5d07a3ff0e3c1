"""Command line entry point.

Settings come from (lowest to highest precedence) built-in defaults, a
``key=value`` config file (``--config``), ``FEEDBACKCLF_<KEY>`` environment
variables and ``--set key=value`` / dedicated flags. Unknown keys are errors.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from . import adapt, corpus, harness, stats
from .normalize import RuleSet, default_ruleset
from .textmodel import (EmptyInputError, TrainConfig, VectorFormatError, load_model, load_vectors,
                        predict, save_model, save_vectors, train_supervised, train_unsupervised)

logger = logging.getLogger("feedbackclf")

ENV_PREFIX = "FEEDBACKCLF_"

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _bool(v: str) -> bool:
    low = str(v).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _opt_str(v):
    return None if v in (None, "", "none", "None") else str(v)


def _opt_int(v):
    return None if v in (None, "", "none", "None", "all") else int(v)


# key -> (parser, default, help)
SETTINGS = {
    "id": (str, "experiment", "experiment id used in result records"),
    "subtask": (str, "A", "A (relevance) or B (sentiment)"),
    "train": (_opt_str, None, "training split TSV"),
    "dev": (_opt_str, None, "development split TSV"),
    "test_syn": (_opt_str, None, "synchronic test split TSV"),
    "test_dia": (_opt_str, None, "diachronic test split TSV"),
    "casing": (str, "lowercased", "cased or lowercased normalization"),
    "vectors": (_opt_str, None, "pretrained word vectors for supervised init"),
    "base_vectors": (_opt_str, None, "vectors continued by an adaptation plan"),
    "domain": (_opt_str, None, "unlabeled domain corpus, one text per line"),
    "plan": (_opt_str, None, "adaptation plan file (key=value)"),
    "store": (_opt_str, None, "results store (JSON lines) to append to"),
    "k": (int, 5, "cross-validation folds"),
    "seed": (int, 42, "training seed"),
    "cv_seed": (_opt_int, None, "fold assignment seed (defaults to seed)"),
    "dim": (int, 50, "embedding dimension"),
    "lr": (float, 0.1, "initial learning rate (linear decay to 0)"),
    "epochs": (int, 20, "training epochs"),
    "word_ngrams": (int, 4, "max word n-gram order"),
    "bucket": (int, 2_000_000, "hash buckets for n-grams / subwords"),
    "min_count": (_opt_int, None, "minimal word count (1 supervised, 5 unsupervised)"),
    "minn": (_opt_int, None, "min char n-gram (0 = off; 3 for unsupervised)"),
    "maxn": (_opt_int, None, "max char n-gram (0 = off; 6 for unsupervised)"),
    "threads": (int, 1, "threads; >1 is faster but not reproducible"),
    "shuffle": (_bool, False, "shuffle documents each epoch"),
    "objective": (str, "skipgram", "unsupervised objective: skipgram or cbow"),
    "window": (int, 5, "context window"),
    "neg": (int, 5, "negatives per positive"),
    "sampling_t": (float, 1e-4, "frequent-word subsampling threshold"),
}


PATH_KEYS = ("train", "dev", "test_syn", "test_dia", "vectors", "base_vectors", "domain", "plan", "store")


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key = value`` lines; relative paths resolve against the file's directory."""
    out = {}
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in PATH_KEYS and val and val != "none":
            val = str(Path(path).parent / val)
        out[key] = val
    return out


def resolve_settings(args: argparse.Namespace, environ=os.environ) -> dict:
    raw: dict[str, str] = {}
    if getattr(args, "config", None):
        raw.update(read_config_file(args.config))
    for key in SETTINGS:
        env = environ.get(ENV_PREFIX + key.upper())
        if env is not None:
            raw[key] = env
    for item in getattr(args, "set", None) or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        raw[k.strip()] = v.strip()
    for key in SETTINGS:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    unknown = sorted(set(raw) - set(SETTINGS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for key, (conv, default, _) in SETTINGS.items():
        try:
            out[key] = conv(raw[key]) if key in raw else default
        except ValueError as err:
            raise UsageError(f"bad value for {key}: {err}") from None
    if out["subtask"] not in harness.SUBTASKS:
        raise UsageError("subtask must be A or B")
    if out["casing"] not in ("cased", "lowercased"):
        raise UsageError("casing must be cased or lowercased")
    return out


def train_config_from(s: dict, unsupervised: bool = False) -> TrainConfig:
    base = TrainConfig.unsupervised() if unsupervised else TrainConfig()
    changes = dict(dim=s["dim"], lr0=s["lr"], epochs=s["epochs"], bucket_count=s["bucket"],
                   threads=s["threads"], seed=s["seed"], shuffle=s["shuffle"], model=s["objective"],
                   window=s["window"], neg=s["neg"], sampling_t=s["sampling_t"])
    if not unsupervised:
        changes["word_ngrams"] = s["word_ngrams"]
    for key in ("min_count", "minn", "maxn"):
        if s[key] is not None:
            changes[key] = s[key]
    return base.replace(**changes)


def experiment_from(s: dict) -> harness.ExperimentConfig:
    plan = adapt.AdaptPlan.loads(Path(s["plan"]).read_text(encoding="utf-8")) if s["plan"] else None
    return harness.ExperimentConfig(
        id=s["id"], subtask=s["subtask"], train=s["train"], dev=s["dev"], test_syn=s["test_syn"],
        test_dia=s["test_dia"], train_config=train_config_from(s), casing=s["casing"],
        pretrained_vectors=s["vectors"], adapt_plan=plan, base_vectors=s["base_vectors"],
        domain_corpus=s["domain"], cv_seed=s["seed"] if s["cv_seed"] is None else s["cv_seed"], k=s["k"])


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_ingest(args, out):
    ds = corpus.read_tsv(args.input, split_name=args.split, strict=not args.lenient)
    lines = [f"documents={len(ds)}", f"record_errors={len(ds.errors)}"]
    if args.clean:
        ds = corpus.clean(ds)
        lines.append(f"after_clean={len(ds)}")
    for task in corpus.TASKS:
        for label, count in corpus.class_distribution(ds, task).items():
            lines.append(f"{task}.{label}={count}")
    for err in ds.errors:
        logger.warning("%s", err)
    if args.output:
        corpus.write_tsv(ds, args.output)
    out.write("\n".join(lines) + "\n")


def _ruleset(args) -> RuleSet:
    if getattr(args, "rules", None):
        rs = RuleSet.load(args.rules)
        if args.lowercase:
            rs = RuleSet(rs.rules, "lowercased", rs.version)
        return rs
    return default_ruleset("lowercased" if args.lowercase else "cased")


def cmd_preprocess(args, out):
    rs = _ruleset(args)
    if args.dump_rules:
        out.write(rs.dumps())
        return
    if args.input is None:
        raise UsageError("preprocess needs --input")
    if args.lines:
        texts = corpus.read_lines(args.input).lines
        result = "".join(rs.apply(t) + "\n" for t in texts)
    else:
        ds = corpus.read_tsv(args.input, strict=not args.lenient)
        if args.clean:
            ds = corpus.clean(ds)
        from .normalize import normalize_dataset
        result = corpus.serialize_tsv(normalize_dataset(ds, rs))
    if args.output:
        Path(args.output).write_text(result, encoding="utf-8")
    else:
        out.write(result)


def cmd_stats(args, out):
    if args.lines:
        texts = list(corpus.read_lines(args.input).lines)
    else:
        texts = corpus.read_tsv(args.input, strict=not args.lenient).texts
    if args.normalize:
        rs = default_ruleset("lowercased" if args.lowercase else "cased")
        texts = [rs.apply(t) for t in texts]
    elif args.lowercase:
        texts = [t.lower() for t in texts]
    st = stats.compute_stats(texts)
    name = args.name or Path(args.input).stem
    if args.format == "records":
        out.write(stats.format_records(name, st) + "\n")
    else:
        out.write(stats.format_table([(name, st)]) + "\n")


def cmd_train(args, out):
    s = resolve_settings(args)
    exp = experiment_from(s)
    if not exp.train:
        raise UsageError("train needs --train")
    ds = harness.load_split(exp.train, "training")
    if exp.dev:
        ds = ds + harness.load_split(exp.dev, "development")
    texts, kept = harness.prepare_training(ds, exp.ruleset)
    tc = exp.train_config
    if exp.pretrained_vectors:
        from .textmodel import attach_pretrained
        tc = attach_pretrained(tc, exp.pretrained_vectors)
    model = train_supervised(texts, kept.labels(exp.task), tc, exp.label_set, exp.ruleset)
    save_model(model, args.output)
    out.write(f"model={args.output}\nlabels={','.join(model.labels)}\nwords={model.vocab.n_words}\n"
              f"final_loss={model.epoch_losses[-1] if len(model.epoch_losses) else float('nan'):.6f}\n")


def cmd_pretrain(args, out):
    s = resolve_settings(args)
    texts = list(corpus.read_lines(args.input).lines)
    if args.normalize:
        rs = default_ruleset(s["casing"])
        texts = [rs.apply(t) for t in texts]
    cfg = train_config_from(s, unsupervised=True)
    vocab, table, losses = train_unsupervised(texts, cfg)
    save_vectors(table, vocab, args.output)
    out.write(f"vectors={args.output}\nwords={vocab.n_words}\ndim={table.dim}\n"
              f"final_loss={losses[-1] if len(losses) else float('nan'):.6f}\n")


def _plan_from_args(args) -> adapt.AdaptPlan:
    if args.plan:
        plan = adapt.AdaptPlan.loads(Path(args.plan).read_text(encoding="utf-8"))
    else:
        plan = adapt.AdaptPlan()
    overrides = {}
    for attr, key in (("source", "source"), ("subset", "domain_subset"), ("mask_prob", "mask_prob"),
                      ("adapt_epochs", "epochs"), ("adapt_seed", "seed")):
        val = getattr(args, attr)
        if val is not None:
            overrides[key] = adapt._coerce(key, str(val)) if key != "source" else val
    if args.expand_vocab:
        overrides["expand_vocab"] = True
    return adapt.AdaptPlan(**{**{f.name: getattr(plan, f.name) for f in fields(plan)}, **overrides})


def cmd_adapt(args, out):
    plan = _plan_from_args(args)
    base = load_vectors(args.base)
    task = None
    if args.task:
        ds = corpus.clean(corpus.read_tsv(args.task))
        rs = default_ruleset("cased" if args.cased else "lowercased")
        task = corpus.UnlabeledCorpus(tuple(rs.apply(t) for t in ds.texts), "task")
    domain = corpus.read_lines(args.domain) if args.domain else None
    result = adapt.continue_pretraining(plan, base, task, domain)
    save_vectors(result.table, result.vocab, args.output)
    out.write(json.dumps(result.provenance, sort_keys=True) + "\n")


def cmd_predict(args, out):
    model = load_model(args.model)
    texts = [args.text] if args.text is not None else [ln.rstrip("\n") for ln in sys.stdin]
    for t in texts:
        top = predict(model, t, args.k)
        out.write(" ".join(f"{lab} {p:.6f}" for lab, p in top) + "\n")


def _print_eval(name, rep, out):
    out.write(f"{name}.n={rep.n}\n{name}.micro_precision={rep.micro_precision:.6f}\n"
              f"{name}.micro_recall={rep.micro_recall:.6f}\n{name}.micro_f1={rep.micro_f1:.6f}\n")


def cmd_evaluate(args, out):
    s = resolve_settings(args)
    if args.model:
        if not args.input:
            raise UsageError("evaluate --model needs --input")
        model = load_model(args.model)
        task = harness.SUBTASKS[s["subtask"]]
        rep = harness.evaluate_model(model, corpus.read_tsv(args.input), task)
        _print_eval(Path(args.input).stem, rep, out)
        return
    exp = experiment_from(s)
    reports, _, prov = harness.run_test_eval(exp)
    if s["store"]:
        store = harness.ResultStore(s["store"])
        for rec in harness.eval_records(exp.id, reports, prov):
            store.append(rec)
    out.write(harness.format_test_table([(exp.id, reports)]) + "\n")


def cmd_cv(args, out):
    s = resolve_settings(args)
    exp = experiment_from(s)
    report, prov = harness.run_cv(exp)
    rec = harness.cv_record(report, prov)
    if s["store"]:
        harness.ResultStore(s["store"]).append(rec)
    out.write(harness.format_cv_table([report]) + "\n")
    out.write("folds=" + ",".join(f"{x:.6f}" for x in report.fold_scores) + "\n")


def cmd_compare(args, out):
    store = harness.ResultStore(args.store)
    rows = harness.compare_to_baseline(store, args.baseline, args.candidates, args.alpha)
    table = rows + [store.cv_report(args.baseline)]
    out.write(harness.format_cv_table(table) + "\n")
    for r in rows:
        out.write(f"{r.config_id}.p={r.p_value:.6g}\n")


SPECIALS = {"[PAD]": 0, "[CLS]": 1, "[SEP]": 2, "[MASK]": 3}


def cmd_mask(args, out):
    lines = [ln.split() for ln in corpus.read_lines(args.input).lines] if args.input else \
        [ln.split() for ln in sys.stdin]
    vocab = dict(SPECIALS)
    for toks in lines:
        for t in toks:
            vocab.setdefault(t, len(vocab))
    inv = {i: w for w, i in vocab.items()}
    seqs = [[SPECIALS["[CLS]"]] + [vocab[t] for t in toks] + [SPECIALS["[SEP]"]] for toks in lines]
    cfg = adapt.MaskingConfig(vocab_size=max(len(vocab), len(SPECIALS) + 1), mask_token_id=SPECIALS["[MASK]"],
                              special_token_ids=frozenset(SPECIALS.values()), mask_prob=args.mask_prob,
                              seed=args.seed)
    batch = adapt.mlm_mask(seqs, cfg)
    for ids, lab in zip(batch.input_ids, batch.labels):
        out.write(json.dumps({"tokens": [inv[int(i)] for i in ids], "input_ids": ids.tolist(),
                              "labels": lab.tolist()}, ensure_ascii=False) + "\n")


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_settings(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config key")
    g = p.add_argument_group("config keys (also FEEDBACKCLF_<KEY> env vars)")
    for key, (_, default, help_) in SETTINGS.items():
        # values stay strings here and are converted once merged with file and env
        g.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                       help=f"{help_} (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="feedbackclf", description="German customer-feedback classification pipeline")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("ingest", help="parse and validate a TSV split, print counts")
    s.add_argument("--input", required=True)
    s.add_argument("--split", default="custom", choices=corpus.SPLITS)
    s.add_argument("--lenient", action="store_true", help="skip malformed records")
    s.add_argument("--clean", action="store_true", help="drop duplicate and empty texts")
    s.add_argument("--output", help="write the (cleaned) dataset back as TSV")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("preprocess", help="normalize texts")
    s.add_argument("--input")
    s.add_argument("--output")
    s.add_argument("--lowercase", action="store_true")
    s.add_argument("--rules", help="rules file (default: built-in rules)")
    s.add_argument("--dump-rules", action="store_true", help="print the rules file and exit")
    s.add_argument("--lines", action="store_true", help="input is plain text, one document per line")
    s.add_argument("--lenient", action="store_true")
    s.add_argument("--clean", action="store_true")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("stats", help="unique n-gram counts and mean lengths")
    s.add_argument("--input", required=True)
    s.add_argument("--normalize", action="store_true")
    s.add_argument("--lowercase", action="store_true")
    s.add_argument("--lines", action="store_true")
    s.add_argument("--lenient", action="store_true")
    s.add_argument("--name")
    s.add_argument("--format", choices=("table", "records"), default="table")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("train", help="train the supervised classifier")
    s.add_argument("--output", required=True)
    _add_settings(s)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("pretrain", help="train word vectors on unlabeled text")
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.add_argument("--normalize", action="store_true", help="normalize lines first")
    _add_settings(s)
    s.set_defaults(func=cmd_pretrain)

    s = sub.add_parser("adapt", help="continue training word vectors on task/domain text")
    s.add_argument("--base", required=True, help="vectors to continue from")
    s.add_argument("--output", required=True)
    s.add_argument("--plan", help="plan file (key=value)")
    s.add_argument("--task", help="task TSV (texts used without labels)")
    s.add_argument("--domain", help="domain corpus, one text per line")
    s.add_argument("--source", choices=adapt.SOURCES)
    s.add_argument("--subset", help="domain lines to sample, or 'all'")
    s.add_argument("--mask-prob", type=float)
    s.add_argument("--expand-vocab", action="store_true")
    s.add_argument("--adapt-epochs", type=int)
    s.add_argument("--adapt-seed", type=int)
    s.add_argument("--cased", action="store_true", help="normalize task text without lowercasing")
    s.set_defaults(func=cmd_adapt)

    s = sub.add_parser("predict", help="top-k labels for raw texts")
    s.add_argument("--model", required=True)
    s.add_argument("--text", help="text to classify (default: one per stdin line)")
    s.add_argument("-k", type=int, default=1)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", help="evaluate a saved model, or train on train+dev and test")
    s.add_argument("--model")
    s.add_argument("--input")
    _add_settings(s)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("cv", help="stratified k-fold cross-validation on the training split")
    _add_settings(s)
    s.set_defaults(func=cmd_cv)

    s = sub.add_parser("compare", help="rank-sum comparison of stored CV runs against a baseline")
    s.add_argument("--store", required=True)
    s.add_argument("--baseline", required=True)
    s.add_argument("--candidates", nargs="*", default=[])
    s.add_argument("--alpha", type=float, default=0.05)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("mask", help="dump masked-LM corruption of whitespace-tokenized lines")
    s.add_argument("--input")
    s.add_argument("--mask-prob", type=float, default=0.15)
    s.add_argument("--seed", type=int, default=42)
    s.set_defaults(func=cmd_mask)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    handler = logging.StreamHandler(err)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("feedbackclf")
    root.handlers[:] = [handler]
    root.propagate = False
    try:
        args = parser.parse_args(argv)
        root.setLevel(logging.DEBUG if args.verbose else logging.INFO)
        if args.command is None:
            err.write(parser.format_help())
            return EXIT_USAGE
        args.func(args, out)
        return EXIT_OK
    except UsageError as e:
        err.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    except (corpus.DataError, VectorFormatError, EmptyInputError, FileNotFoundError,
            UnicodeDecodeError, ValueError, KeyError) as e:
        err.write(f"data error: {e}\n")
        return EXIT_DATA
    except Exception as e:  # noqa: BLE001
        logger.exception("internal error")
        err.write(f"internal error: {e}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
