"""Domain adaptation at desk scale.

Pretrains embeddings on raw domain text, continues training on task text
with vocabulary expansion and the masking analog, then fine-tunes the
classifier with and without the adapted vectors. The masking collator
used for transformer-style pretraining is shown on one sequence.
"""

import tempfile
from pathlib import Path

from synthetic import write_splits

from feedbackclf.adapt import AdaptPlan, MaskingConfig, continue_pretraining, mlm_mask
from feedbackclf.corpus import UnlabeledCorpus, read_lines, read_tsv
from feedbackclf.harness import ExperimentConfig, adapt_then_finetune
from feedbackclf.normalize import default_ruleset
from feedbackclf.textmodel import TrainConfig, save_vectors, train_unsupervised

UNSUP = TrainConfig.unsupervised(dim=50, epochs=5, min_count=2, bucket_count=20_000)

with tempfile.TemporaryDirectory() as tmp:
    paths = write_splits(Path(tmp))
    domain = read_lines(paths["domain"], "domain")
    vocab, table, _ = train_unsupervised(domain.lines, UNSUP)
    save_vectors(table, vocab, Path(tmp) / "base.vec")
    print(f"base embeddings: {vocab.n_words} words, dim {table.dim}")

    rules = default_ruleset("lowercased")
    task = UnlabeledCorpus(tuple(rules.apply(d.text) for d in read_tsv(paths["train"]).documents), "task")
    plan = AdaptPlan("task_plus_domain", domain_subset=200, mask_prob=0.3, expand_vocab=True, epochs=3)
    result = continue_pretraining(plan, (vocab, table), task, domain, UNSUP)
    print(f"adapted with plan {result.provenance['plan']!r}: +{result.provenance['new_words']} words")

    base = ExperimentConfig("demo", subtask="A", train_config=TrainConfig(bucket_count=50_000, epochs=5),
                            base_vectors=str(Path(tmp) / "base.vec"), domain_corpus=str(paths["domain"]))
    train, test = read_tsv(paths["train"], "training"), read_tsv(paths["test_syn"], "test_syn")
    for p in (None, plan):
        _, report, _ = adapt_then_finetune(p, train, base, eval_dataset=test)
        print(f"{p.name if p else 'no adaptation':40} test micro-F1 {report.micro_f1:.3f}")

# [PAD]=0 [CLS]=1 [SEP]=2 [MASK]=3, everything else is an ordinary token
ids = [1] + list(range(4, 24)) + [2]
batch = mlm_mask(ids, MaskingConfig(vocab_size=30, mask_token_id=3, special_token_ids=frozenset({0, 1, 2}),
                                    mask_prob=0.3, seed=7))
print("\ninput ", ids)
print("masked", batch.input_ids[0].tolist())
print("labels", batch.labels[0].tolist())
