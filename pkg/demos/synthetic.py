"""Tiny synthetic stand-in for the GermEval TSV splits, used by the demos."""

import random
from pathlib import Path

from feedbackclf.corpus import Document, LabeledDataset, write_tsv

RAIL = ["zug", "bahn", "s-bahn", "ice", "gleis", "fahrplan", "schaffner", "bahnhof", "ticket"]
OTHER = ["pizza", "fussball", "wetter", "kino", "urlaub", "katze", "konzert", "garten"]
POS = ["super", "toll", "pünktlich", "danke", "freundlich", "bequem"]
NEG = ["verspätung", "ausfall", "chaos", "kaputt", "dreckig", "ärgerlich"]
FILL = ["heute", "wieder", "mal", "die", "der", "und", "mit", "ist", "schon", "noch"]
DECOR = ["", "", " :)", " :(", " @DB_Bahn", " http://t.co/xyz", " #bahn", " 10:30", " 3 €"]


def document(rng: random.Random, i: int) -> Document:
    relevant = rng.random() < 0.8
    r = rng.random()
    sentiment = "neutral" if r < 0.6 else ("negative" if r < 0.9 else "positive")
    words = [rng.choice(RAIL if relevant else OTHER) for _ in range(rng.randint(1, 3))]
    words += [rng.choice(FILL) for _ in range(rng.randint(1, 4))]
    if sentiment != "neutral":
        words += [rng.choice(NEG if sentiment == "negative" else POS) for _ in range(rng.randint(1, 2))]
    rng.shuffle(words)
    return Document(f"http://example.org/{i}", " ".join(words).capitalize() + rng.choice(DECOR),
                    relevant, sentiment)


def write_splits(root: Path, seed: int = 0) -> dict[str, Path]:
    """Write train/dev/test_syn/test_dia TSVs and a raw domain text file."""
    rng = random.Random(seed)
    sizes = {"train": 600, "dev": 100, "test_syn": 150, "test_dia": 150}
    paths, i = {}, 0
    for name, n in sizes.items():
        docs = []
        for _ in range(n):
            docs.append(document(rng, i))
            i += 1
        paths[name] = root / f"{name}.tsv"
        write_tsv(LabeledDataset(tuple(docs)), paths[name])
    paths["domain"] = root / "domain.txt"
    paths["domain"].write_text(
        "\n".join(" ".join(rng.choice(RAIL + FILL + NEG + POS) for _ in range(8)) for _ in range(500)) + "\n",
        encoding="utf-8")
    return paths
