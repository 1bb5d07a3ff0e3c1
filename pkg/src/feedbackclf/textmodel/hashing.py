"""64-bit FNV-1a hashing of word n-grams and character n-grams.

``fnv1a_64`` is the plain reference; the ``numba`` functions hash whole
corpora packed into one UTF-8 byte buffer and must agree with it bit for bit.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numba import njit

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1
_SPACE = 0x20


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK
    return h


def word_ngram_strings(tokens: Sequence[str], max_n: int) -> list[str]:
    """All n-grams with ``2 <= n <= max_n``, ordered by start then length."""
    out = []
    for i in range(len(tokens)):
        for j in range(i + 2, min(i + max_n, len(tokens)) + 1):
            out.append(" ".join(tokens[i:j]))
    return out


def char_ngram_strings(word: str, minn: int, maxn: int) -> list[str]:
    """Character n-grams of ``<word>``; single boundary characters are skipped."""
    w = f"<{word}>"
    out = []
    for i in range(len(w)):
        for n in range(minn, maxn + 1):
            if i + n > len(w):
                break
            if n == 1 and (i == 0 or i + n == len(w)):
                continue
            out.append(w[i:i + n])
    return out


def pack(strings: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """UTF-8 encode ``strings`` into one buffer plus ``len+1`` offsets."""
    encoded = [s.encode("utf-8") for s in strings]
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    np.cumsum([len(e) for e in encoded], out=offsets[1:])
    buf = np.frombuffer(b"".join(encoded), dtype=np.uint8) if encoded else np.zeros(0, np.uint8)
    return buf, offsets


@njit(cache=True)
def _fnv_step(h, b):
    h ^= np.uint64(b)
    return h * np.uint64(FNV_PRIME)


@njit(cache=True)
def hash_packed(buf, offsets):
    out = np.empty(len(offsets) - 1, dtype=np.uint64)
    for k in range(len(offsets) - 1):
        h = np.uint64(FNV_OFFSET)
        for p in range(offsets[k], offsets[k + 1]):
            h = _fnv_step(h, buf[p])
        out[k] = h
    return out


@njit(cache=True)
def word_ngram_hashes(buf, tok_off, doc_off, max_n):
    """Hashes of all word n-grams (2..max_n) per document.

    ``tok_off`` delimits tokens inside ``buf``; ``doc_off`` delimits documents
    in units of tokens. Returns (hashes, ptr) in CSR layout.
    """
    n_docs = len(doc_off) - 1
    ptr = np.zeros(n_docs + 1, dtype=np.int64)
    for d in range(n_docs):
        L = doc_off[d + 1] - doc_off[d]
        cnt = 0
        for i in range(L):
            cnt += max(0, min(max_n, L - i) - 1)
        ptr[d + 1] = ptr[d] + cnt
    out = np.empty(ptr[n_docs], dtype=np.uint64)
    pos = 0
    for d in range(n_docs):
        t0 = doc_off[d]
        t1 = doc_off[d + 1]
        for i in range(t0, t1):
            h = np.uint64(FNV_OFFSET)
            for p in range(tok_off[i], tok_off[i + 1]):
                h = _fnv_step(h, buf[p])
            for j in range(i + 1, min(i + max_n, t1)):
                h = _fnv_step(h, _SPACE)
                for p in range(tok_off[j], tok_off[j + 1]):
                    h = _fnv_step(h, buf[p])
                out[pos] = h
                pos += 1
    return out, ptr


@njit(cache=True)
def char_ngram_hashes(buf, word_off, minn, maxn):
    """Hashes of the character n-grams of ``<word>`` for each packed word.

    Works on UTF-8 bytes but only starts/ends n-grams on codepoint
    boundaries, matching :func:`char_ngram_strings`.
    """
    n_words = len(word_off) - 1
    ptr = np.zeros(n_words + 1, dtype=np.int64)
    # upper bound: every codepoint position times every length
    cap = 0
    for k in range(n_words):
        cap += (word_off[k + 1] - word_off[k] + 2) * (maxn - minn + 1)
    out = np.empty(cap, dtype=np.uint64)
    pos = 0
    for k in range(n_words):
        s = word_off[k]
        e = word_off[k + 1]
        L = e - s + 2
        w = np.empty(L, dtype=np.uint8)
        w[0] = 60  # '<'
        w[1:L - 1] = buf[s:e]
        w[L - 1] = 62  # '>'
        for i in range(L):
            if (w[i] & 0xC0) == 0x80:
                continue
            h = np.uint64(FNV_OFFSET)
            j = i
            n = 1
            while j < L and n <= maxn:
                h = _fnv_step(h, w[j])
                j += 1
                while j < L and (w[j] & 0xC0) == 0x80:
                    h = _fnv_step(h, w[j])
                    j += 1
                if n >= minn and not (n == 1 and (i == 0 or j == L)):
                    out[pos] = h
                    pos += 1
                n += 1
        ptr[k + 1] = pos
    return out[:pos].copy(), ptr
