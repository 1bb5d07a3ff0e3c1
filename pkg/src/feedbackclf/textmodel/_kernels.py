"""numba SGD loops. All randomness comes from an explicit xorshift64* state."""

import numpy as np
from numba import njit, prange

_XS_MULT = np.uint64(0x2545F4914F6CDD1D)


@njit(cache=True)
def seed_state(seed):
    # splitmix64 scramble so that small seeds give unrelated streams
    z = np.uint64(seed) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    if z == 0:
        z = np.uint64(1)
    st = np.empty(1, dtype=np.uint64)
    st[0] = z
    return st


@njit(cache=True)
def _next(st):
    x = st[0]
    x ^= x >> np.uint64(12)
    x ^= x << np.uint64(25)
    x ^= x >> np.uint64(27)
    st[0] = x
    return x * _XS_MULT


@njit(cache=True)
def _uniform(st):
    return (_next(st) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _randint(st, lo, hi):
    """Uniform integer in [lo, hi]."""
    return lo + np.int64(_next(st) % np.uint64(hi - lo + 1))


# --------------------------------------------------------------------------
# supervised: softmax over averaged feature rows
# --------------------------------------------------------------------------

@njit(cache=True)
def _sup_example(W_in, W_out, feats, target, lr, hidden, grad, probs):
    dim = W_in.shape[1]
    n_lab = W_out.shape[0]
    nf = len(feats)
    hidden[:] = 0.0
    for f in feats:
        for k in range(dim):
            hidden[k] += W_in[f, k]
    for k in range(dim):
        hidden[k] /= nf
    mx = -1e300
    for i in range(n_lab):
        s = 0.0
        for k in range(dim):
            s += W_out[i, k] * hidden[k]
        probs[i] = s
        if s > mx:
            mx = s
    z = 0.0
    for i in range(n_lab):
        probs[i] = np.exp(probs[i] - mx)
        z += probs[i]
    for i in range(n_lab):
        probs[i] /= z
    loss = -np.log(max(probs[target], 1e-300))
    grad[:] = 0.0
    for i in range(n_lab):
        alpha = lr * ((1.0 if i == target else 0.0) - probs[i])
        for k in range(dim):
            grad[k] += alpha * W_out[i, k]
            W_out[i, k] += alpha * hidden[k]
    for k in range(dim):
        grad[k] /= nf
    for f in feats:
        for k in range(dim):
            W_in[f, k] += grad[k]
    return loss


@njit(cache=True)
def _sup_range(W_in, W_out, ptr, rows, labels, n_tokens, order, start, stop,
               lr0, total, done0, scale, epoch_loss, epoch_cnt, ep):
    dim = W_in.shape[1]
    hidden = np.zeros(dim)
    grad = np.zeros(dim)
    probs = np.zeros(W_out.shape[0])
    done = done0
    for q in range(start, stop):
        d = order[q]
        lr = lr0 * (1.0 - (done * scale) / total)
        done += n_tokens[d]
        if ptr[d + 1] == ptr[d]:
            continue
        epoch_loss[ep] += _sup_example(W_in, W_out, rows[ptr[d]:ptr[d + 1]], labels[d], lr,
                                       hidden, grad, probs)
        epoch_cnt[ep] += 1
    return done


@njit(cache=True)
def train_supervised(W_in, W_out, ptr, rows, labels, n_tokens, orders, lr0):
    """Single-threaded SGD; ``orders[e]`` is the document order of epoch e."""
    epochs = orders.shape[0]
    total = float(epochs * n_tokens.sum())
    epoch_loss = np.zeros(epochs)
    epoch_cnt = np.zeros(epochs)
    done = 0
    for ep in range(epochs):
        done = _sup_range(W_in, W_out, ptr, rows, labels, n_tokens, orders[ep], 0, orders.shape[1],
                          lr0, total, done, 1.0, epoch_loss, epoch_cnt, ep)
    return epoch_loss / np.maximum(epoch_cnt, 1)


@njit(cache=True, parallel=True)
def train_supervised_hogwild(W_in, W_out, ptr, rows, labels, n_tokens, orders, lr0, threads):
    """Lock-free multi-threaded variant; results depend on scheduling."""
    epochs = orders.shape[0]
    n = orders.shape[1]
    total = float(epochs * n_tokens.sum())
    loss = np.zeros((threads, epochs))
    cnt = np.zeros((threads, epochs))
    for t in prange(threads):
        start = t * n // threads
        stop = (t + 1) * n // threads
        done = 0
        for ep in range(epochs):
            done = _sup_range(W_in, W_out, ptr, rows, labels, n_tokens, orders[ep], start, stop,
                              lr0, total, done, float(threads), loss[t], cnt[t], ep)
    return loss.sum(axis=0) / np.maximum(cnt.sum(axis=0), 1)


@njit(cache=True)
def predict_scores(W_in, W_out, feats):
    dim = W_in.shape[1]
    hidden = np.zeros(dim)
    if len(feats) > 0:
        for f in feats:
            for k in range(dim):
                hidden[k] += W_in[f, k]
        hidden /= len(feats)
    logits = np.zeros(W_out.shape[0])
    for i in range(W_out.shape[0]):
        for k in range(dim):
            logits[i] += W_out[i, k] * hidden[k]
    return logits


# --------------------------------------------------------------------------
# unsupervised: skip-gram / CBOW with negative sampling
# --------------------------------------------------------------------------

@njit(cache=True)
def _sigmoid(x):
    if x < -30.0:
        return 0.0
    if x > 30.0:
        return 1.0
    return 1.0 / (1.0 + np.exp(-x))


@njit(cache=True)
def _ns_update(W_in, W_out, inputs, n_inputs, target, neg_table, neg, lr, st, hidden, grad):
    dim = W_in.shape[1]
    hidden[:] = 0.0
    for a in range(n_inputs):
        f = inputs[a]
        for k in range(dim):
            hidden[k] += W_in[f, k]
    for k in range(dim):
        hidden[k] /= n_inputs
    grad[:] = 0.0
    loss = 0.0
    for s in range(neg + 1):
        if s == 0:
            t = target
            label = 1.0
        else:
            t = target
            while t == target:
                t = neg_table[_randint(st, 0, len(neg_table) - 1)]
            label = 0.0
        dot = 0.0
        for k in range(dim):
            dot += W_out[t, k] * hidden[k]
        score = _sigmoid(dot)
        if label == 1.0:
            loss -= np.log(max(score, 1e-12))
        else:
            loss -= np.log(max(1.0 - score, 1e-12))
        alpha = lr * (label - score)
        for k in range(dim):
            grad[k] += alpha * W_out[t, k]
            W_out[t, k] += alpha * hidden[k]
    for a in range(n_inputs):
        f = inputs[a]
        for k in range(dim):
            W_in[f, k] += grad[k]
    return loss


@njit(cache=True)
def train_unsupervised(W_in, W_out, doc_ptr, doc_words, sub_ptr, sub_rows, keep_prob,
                       neg_table, epochs, lr0, window, neg, cbow, context_drop, seed):
    """Returns the mean loss of each epoch.

    ``doc_words`` holds vocabulary ids of each document (CSR by ``doc_ptr``);
    ``sub_ptr``/``sub_rows`` give the extra input rows of each word.
    ``context_drop`` removes each context position with that probability.
    """
    st = seed_state(seed)
    dim = W_in.shape[1]
    n_docs = len(doc_ptr) - 1
    n_tok = len(doc_words)
    total = float(epochs) * n_tok
    hidden = np.zeros(dim)
    grad = np.zeros(dim)
    max_sub = 0
    for w in range(len(sub_ptr) - 1):
        max_sub = max(max_sub, sub_ptr[w + 1] - sub_ptr[w])
    line = np.empty(max(1, n_tok), dtype=np.int64)
    buf = np.empty((2 * window + 1) * (max_sub + 1) + max_sub + 1, dtype=np.int64)
    losses = np.zeros(max(epochs, 1))
    counts = np.zeros(max(epochs, 1))
    done = 0
    for ep in range(epochs):
        for d in range(n_docs):
            lr = lr0 * (1.0 - done / total)
            L = 0
            for p in range(doc_ptr[d], doc_ptr[d + 1]):
                w = doc_words[p]
                if _uniform(st) <= keep_prob[w]:
                    line[L] = w
                    L += 1
            done += doc_ptr[d + 1] - doc_ptr[d]
            for i in range(L):
                b = _randint(st, 1, window)
                if cbow:
                    m = 0
                    for c in range(max(0, i - b), min(L, i + b + 1)):
                        if c == i:
                            continue
                        if context_drop > 0.0 and _uniform(st) < context_drop:
                            continue
                        w = line[c]
                        buf[m] = w
                        m += 1
                        for q in range(sub_ptr[w], sub_ptr[w + 1]):
                            buf[m] = sub_rows[q]
                            m += 1
                    if m == 0:
                        continue
                    losses[ep] += _ns_update(W_in, W_out, buf, m, line[i], neg_table, neg, lr, st,
                                             hidden, grad)
                    counts[ep] += 1
                else:
                    w = line[i]
                    m = 0
                    buf[m] = w
                    m += 1
                    for q in range(sub_ptr[w], sub_ptr[w + 1]):
                        buf[m] = sub_rows[q]
                        m += 1
                    for c in range(max(0, i - b), min(L, i + b + 1)):
                        if c == i:
                            continue
                        if context_drop > 0.0 and _uniform(st) < context_drop:
                            continue
                        losses[ep] += _ns_update(W_in, W_out, buf, m, line[c], neg_table, neg, lr,
                                                 st, hidden, grad)
                        counts[ep] += 1
    return losses[:epochs] / np.maximum(counts[:epochs], 1)
