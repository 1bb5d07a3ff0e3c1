"""Linear text classifier and word embeddings with hashed n-gram features."""

from .config import TrainConfig
from .supervised import (EmptyInputError, SupervisedModel, attach_pretrained, load_model, predict,
                         save_model, softmax_loss_and_grads, train_supervised)
from .unsupervised import train_unsupervised
from .vectors import VectorFormatError, load_vectors, save_vectors
from .vocab import EmbeddingTable, EmptyVocabularyError, Vocabulary, build_vocab, featurize

__all__ = [
    "EmbeddingTable", "EmptyInputError", "EmptyVocabularyError", "SupervisedModel", "TrainConfig",
    "VectorFormatError", "Vocabulary", "attach_pretrained", "build_vocab", "featurize", "load_model",
    "load_vectors", "predict", "save_model", "save_vectors", "softmax_loss_and_grads",
    "train_supervised", "train_unsupervised",
]
