import random
from pathlib import Path

import pytest
from hypothesis import settings

from feedbackclf.corpus import Document, LabeledDataset, write_tsv

# numba compiles (or loads from cache) on first call, which breaks per-example deadlines
settings.register_profile("default", deadline=None)
settings.load_profile("default")

RAIL = ["zug", "bahn", "s-bahn", "ice", "gleis", "fahrplan", "schaffner", "bahnhof", "ticket", "regionalbahn"]
OTHER = ["pizza", "fussball", "wetter", "kino", "urlaub", "katze", "konzert", "garten", "buch", "serie"]
POS = ["super", "toll", "pünktlich", "danke", "freundlich", "schnell", "bequem"]
NEG = ["verspätung", "ausfall", "chaos", "kaputt", "dreckig", "voll", "ärgerlich"]
FILL = ["heute", "wieder", "mal", "die", "der", "und", "mit", "in", "ist", "war", "schon", "noch"]
DECOR = ["", "", "", " :)", " :(", " @DB_Bahn", " http://t.co/xyz", " #bahn", " 10:30", " 3 €", "!!"]


def make_document(rng: random.Random, i: int) -> Document:
    relevant = rng.random() < 0.8
    topic = RAIL if relevant else OTHER
    r = rng.random()
    sentiment = "neutral" if r < 0.6 else ("negative" if r < 0.9 else "positive")
    words = [rng.choice(topic) for _ in range(rng.randint(1, 3))]
    words += [rng.choice(FILL) for _ in range(rng.randint(1, 5))]
    if sentiment == "negative":
        words += [rng.choice(NEG) for _ in range(rng.randint(1, 2))]
    elif sentiment == "positive":
        words += [rng.choice(POS) for _ in range(rng.randint(1, 2))]
    rng.shuffle(words)
    text = " ".join(words).capitalize() + rng.choice(DECOR) + f" n{i}"
    return Document(f"http://example.org/{i}", text, relevant, sentiment)


def make_dataset(n: int, seed: int = 0, split: str = "custom", start: int = 0) -> LabeledDataset:
    rng = random.Random(seed)
    return LabeledDataset(tuple(make_document(rng, start + i) for i in range(n)), split)


@pytest.fixture(scope="session")
def synthetic_splits(tmp_path_factory) -> dict[str, Path]:
    """Four small synthetic splits written as TSV files."""
    root = tmp_path_factory.mktemp("germeval_synth")
    sizes = {"train": (400, 1), "dev": (80, 2), "test_syn": (120, 3), "test_dia": (120, 4)}
    paths = {}
    start = 0
    for name, (n, seed) in sizes.items():
        paths[name] = root / f"{name}.tsv"
        write_tsv(make_dataset(n, seed, start=start), paths[name])
        start += n
    domain = root / "domain.txt"
    rng = random.Random(9)
    domain.write_text("\n".join(" ".join(rng.choice(RAIL + FILL + NEG + POS) for _ in range(8))
                                for _ in range(300)) + "\n", encoding="utf-8")
    paths["domain"] = domain
    return paths
