"""Relevance and sentiment classification of German customer feedback.

Modules: :mod:`corpus` (TSV splits, cleaning, folds), :mod:`normalize`
(ordered rewrite rules), :mod:`stats`, :mod:`textmodel` (hashed n-gram
classifier and word vectors), :mod:`adapt` (masking, vocabulary expansion,
continued pretraining), :mod:`metrics`, :mod:`stattest`, :mod:`harness`
and :mod:`cli`.
"""

__version__ = "0.1.0"
