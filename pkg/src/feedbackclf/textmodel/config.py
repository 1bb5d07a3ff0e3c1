from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by supervised and unsupervised training.

    Defaults are the supervised baseline. ``pretrained`` holds the path of a
    word-vector file whose rows initialize the input matrix.
    """

    dim: int = 50
    lr0: float = 0.1
    epochs: int = 20
    word_ngrams: int = 4
    loss: str = "softmax"
    threads: int = 1
    seed: int = 42
    min_count: int = 1
    bucket_count: int = 2_000_000
    minn: int = 0
    maxn: int = 0
    shuffle: bool = False
    dtype: str = "float32"
    # unsupervised only
    model: str = "skipgram"
    window: int = 5
    neg: int = 5
    sampling_t: float = 1e-4
    context_drop: float = 0.0
    pretrained: str | None = None

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ValueError("lr0 must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.dim <= 0:
            raise ValueError("dim must be > 0")
        if self.loss != "softmax":
            raise ValueError("only softmax loss is supported")
        if self.model not in ("skipgram", "cbow"):
            raise ValueError(f"unknown model {self.model!r}")
        if not 0.0 <= self.context_drop <= 1.0:
            raise ValueError("context_drop must lie in [0, 1]")

    @classmethod
    def unsupervised(cls, **overrides) -> "TrainConfig":
        base = dict(word_ngrams=1, min_count=5, minn=3, maxn=6)
        base.update(overrides)
        return cls(**base)

    def replace(self, **changes) -> "TrainConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)
