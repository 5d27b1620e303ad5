"""Contrastive fine-tuning with the multiple-negatives ranking loss.

The loss over a batch of B translation pairs combines three terms:

    L = - sum_i S(w_i, v_i)                      (positives)
        + sum_i log sum_{j != i} exp(S(w_i, v_j))  (in-batch negatives)
        + sum_i log sum_k exp(S(w_i, v_{k,i}))     (hard negatives)

with S the scaled cosine. Instead of updating encoder weights, a single
square linear adapter A (shared by both languages, initialized to the
identity) is trained over the frozen type-level vectors; the adapted
vector of a word with base vector x is unit(A x). The gradient of L with
respect to A is computed analytically through the cosine and the
normalization. All arithmetic is float64.
"""

from dataclasses import dataclass, field

import numpy as np

from . import container
from .embed_store import EmbeddingSpace, ZeroVectorError
from .retrieve import SimilarityConfig


@dataclass
class TrainConfig:
    batch_size: int = 128
    n_negatives: int = 10
    scale_c: float = 20.0
    epochs: int = 5
    learning_rate: float = 2e-5
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.n_negatives < 0 or self.epochs < 0:
            raise ValueError("batch size, negatives and epochs must be >= 0/1")
        if self.scale_c <= 0 or self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("scale, learning rate and decay must be positive")


@dataclass
class AdapterState:
    A: np.ndarray
    m: np.ndarray = None  # first-moment accumulator
    v: np.ndarray = None  # second-moment accumulator
    step_count: int = 0

    @classmethod
    def identity(cls, dim):
        return cls(A=np.eye(dim),
                   m=np.zeros((dim, dim)),
                   v=np.zeros((dim, dim)))

    def save(self, path):
        container.write_adapter(path, self.A, self.m, self.v, self.step_count)

    @classmethod
    def load(cls, path):
        A, m, v, step_count = container.read_adapter(path)
        return cls(A=A, m=m, v=v, step_count=step_count)


def _unit_rows(m):
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError("zero vector in contrastive batch")
    return m / norms[:, None], norms


def _logsumexp(s):
    hi = np.max(s)
    return hi + np.log(np.sum(np.exp(s - hi)))


def mneg_loss(batch_src, batch_tgt, hard_negs, cfg=None):
    """Loss value for already-adapted vectors (pure function of inputs).

    batch_src/batch_tgt: (B, d) paired vectors. hard_negs: per-pair
    array of up to N_n target vectors (possibly empty). Empty negative
    collections contribute 0 (their log-sum-exp term is skipped).
    """
    cfg = cfg or SimilarityConfig()
    C = getattr(cfg, "scale_c", 20.0)
    U, _ = _unit_rows(np.atleast_2d(batch_src))
    V, _ = _unit_rows(np.atleast_2d(batch_tgt))
    B = U.shape[0]
    if V.shape[0] != B:
        raise ValueError("source and target batches differ in size")
    S = C * (U @ V.T)
    loss = -float(np.trace(S))
    if B > 1:
        off = ~np.eye(B, dtype=bool)
        for i in range(B):
            loss += float(_logsumexp(S[i][off[i]]))
    for i in range(B):
        negs = np.atleast_2d(np.asarray(hard_negs[i], dtype=np.float64)) \
            if len(hard_negs[i]) else None
        if negs is None or negs.size == 0:
            continue
        G, _ = _unit_rows(negs)
        loss += float(_logsumexp(C * (G @ U[i])))
    return loss


def _batch_loss_and_grad(X, Y, neg_vecs, A, C):
    """Loss and dL/dA for one batch of base (un-adapted) vectors.

    X, Y: (B, d) base vectors; neg_vecs: per-pair (n_i, d) base negative
    vectors. Adapted vectors are unit(A x); the gradient flows through
    the normalization (radial components cancel at cos = 1).
    """
    B, d = X.shape
    P = X @ A.T
    Q = Y @ A.T
    Uh, na = _unit_rows(P)
    Vh, nb = _unit_rows(Q)
    K = Uh @ Vh.T
    S = C * K

    grad = np.zeros((d, d))
    loss = -float(np.trace(S))

    # weight of each (i, j) cosine in dL/dS: -1 on the diagonal from the
    # positive term, softmax over j != i from the in-batch term
    Wt = -np.eye(B)
    if B > 1:
        off = ~np.eye(B, dtype=bool)
        Smask = np.where(off, S, -np.inf)
        hi = Smask.max(axis=1, keepdims=True)
        E = np.exp(Smask - hi)
        Z = E.sum(axis=1, keepdims=True)
        loss += float(np.sum(hi + np.log(Z)))
        Wt = Wt + E / Z

    row_wk = np.sum(Wt * K, axis=1)
    Da = C * (Wt @ Vh - row_wk[:, None] * Uh) / na[:, None]
    col_wk = np.sum(Wt * K, axis=0)
    Db = C * (Wt.T @ Uh - col_wk[:, None] * Vh) / nb[:, None]
    grad += Da.T @ X + Db.T @ Y

    for i in range(B):
        Gi = neg_vecs[i]
        if Gi is None or len(Gi) == 0:
            continue
        Gh, ng = _unit_rows(Gi @ A.T)
        k = Gh @ Uh[i]
        s = C * k
        hi = s.max()
        e = np.exp(s - hi)
        z = e.sum()
        loss += float(hi + np.log(z))
        p = e / z
        da = C * (p @ Gh - float(p @ k) * Uh[i]) / na[i]
        grad += np.outer(da, X[i])
        Dg = (C * p / ng)[:, None] * (Uh[i][None, :] - k[:, None] * Gh)
        grad += Dg.T @ Gi
    return loss, grad


def _gather_batch(ids_src, ids_tgt, neg_ids, src_space, tgt_space):
    X = src_space.matrix[np.asarray(ids_src, dtype=np.int64)].astype(np.float64)
    Y = tgt_space.matrix[np.asarray(ids_tgt, dtype=np.int64)].astype(np.float64)
    negs = [tgt_space.matrix[np.asarray(n, dtype=np.int64)].astype(np.float64)
            if len(n) else None for n in neg_ids]
    return X, Y, negs


def mneg_gradient(ids_src, ids_tgt, neg_ids, src_space, tgt_space,
                  adapter, cfg=None):
    """Analytic dL/dA for a batch given by word ids into the base spaces."""
    cfg = cfg or TrainConfig()
    X, Y, negs = _gather_batch(ids_src, ids_tgt, neg_ids, src_space, tgt_space)
    _, grad = _batch_loss_and_grad(X, Y, negs, adapter.A, cfg.scale_c)
    return grad


def _adamw_step(state, grad, cfg, beta1=0.9, beta2=0.999, eps=1e-8):
    state.step_count += 1
    t = state.step_count
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    mhat = state.m / (1.0 - beta1 ** t)
    vhat = state.v / (1.0 - beta2 ** t)
    # decoupled weight decay: applied to the weights directly, not the grad
    state.A = state.A - cfg.learning_rate * (
        mhat / (np.sqrt(vhat) + eps) + cfg.weight_decay * state.A)


def train(lex, src_space, tgt_space, negatives, cfg=None):
    """Fine-tune the adapter for cfg.epochs over the dictionary.

    negatives must have been mined against these same (pre-training)
    spaces, one entry per lexicon pair. Pairs are reshuffled every epoch
    with the seeded generator; the final short batch is kept. Returns
    (AdapterState, per-epoch mean batch loss).
    """
    cfg = cfg or TrainConfig()
    n = len(lex.pairs)
    if n == 0:
        raise ValueError("empty training lexicon")
    if len(negatives.entries) != n:
        raise ValueError("negative table does not match the lexicon")
    ids_src = np.array([src_space.vocab.id_of(s) for s, _ in lex.pairs])
    ids_tgt = np.array([tgt_space.vocab.id_of(t) for _, t in lex.pairs])
    if (ids_src == None).any() or (ids_tgt == None).any():  # noqa: E711
        raise KeyError("lexicon contains out-of-vocabulary words")
    ids_src = ids_src.astype(np.int64)
    ids_tgt = ids_tgt.astype(np.int64)
    neg_ids = [entry[2] for entry in negatives.entries]

    state = AdapterState.identity(src_space.dim)
    rng = np.random.default_rng(cfg.seed)
    epoch_losses = []
    for _ in range(cfg.epochs):
        perm = rng.permutation(n)
        batch_losses = []
        for b0 in range(0, n, cfg.batch_size):
            sel = perm[b0:b0 + cfg.batch_size]
            X, Y, negs = _gather_batch(ids_src[sel], ids_tgt[sel],
                                       [neg_ids[i] for i in sel],
                                       src_space, tgt_space)
            loss, grad = _batch_loss_and_grad(X, Y, negs, state.A, cfg.scale_c)
            _adamw_step(state, grad, cfg)
            batch_losses.append(loss)
        epoch_losses.append(float(np.mean(batch_losses)))
    return state, epoch_losses


def apply_adapter(space, adapter):
    """Adapted space: rows unit(A x), marked normalized."""
    adapted = space.matrix.astype(np.float64) @ adapter.A.T
    norms = np.linalg.norm(adapted, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError("adapter maps a row to zero")
    adapted = (adapted / norms[:, None]).astype(np.float32)
    return EmbeddingSpace(space.vocab, adapted, normalized=True)


def save_loss_log(epoch_losses, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,mean_loss\n")
        for i, loss in enumerate(epoch_losses, start=1):
            fh.write(f"{i},{loss!r}\n")
