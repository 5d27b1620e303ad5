"""Exact scaled-cosine retrieval and hard-negative mining.

Retrieval is exact: blocked query-by-target score matrices (float64
accumulation) feeding the top-k selection kernel. Ties are broken by the
lower word id, so results are deterministic regardless of blocking or
thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .embed_store import ZeroVectorError


@dataclass
class SimilarityConfig:
    scale_c: float = 20.0

    def __post_init__(self):
        if self.scale_c <= 0:
            raise ValueError("scale constant must be positive")


@dataclass
class NegativeTable:
    # one entry per dictionary pair: (src_word, gold_tgt_word, negative ids)
    entries: list
    n_negatives: int


def scaled_cosine(u, v, cfg=None):
    cfg = cfg or SimilarityConfig()
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine undefined for a zero vector")
    return cfg.scale_c * float(u @ v) / (nu * nv)


def _unit_rows(matrix):
    m = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError("zero row in matrix")
    return m / norms[:, None]


def topk_batch(queries, space, k, exclude_per_query=None, cfg=None,
               threads=1, block_size=8192):
    """Top-k scaled-cosine targets for a batch of query vectors.

    Returns (ids, scores, counts): (q, k) int64 / float64 arrays sorted
    score-descending with the id tie rule, and per-query result counts
    (< k only when the non-excluded vocabulary is exhausted).
    """
    cfg = cfg or SimilarityConfig()
    if k < 1:
        raise ValueError("k must be >= 1")
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    qhat = _unit_rows(queries)
    target = _unit_rows(space.matrix)
    n = target.shape[0]
    q = qhat.shape[0]

    top_scores = np.full((q, k), -np.inf)
    top_ids = np.full((q, k), -1, dtype=np.int64)
    counts = np.zeros(q, dtype=np.int64)

    excl_rows, excl_cols = [], []
    if exclude_per_query is not None:
        for qi, ids in enumerate(exclude_per_query):
            for t in ids:
                excl_rows.append(qi)
                excl_cols.append(t)
    excl_rows = np.asarray(excl_rows, dtype=np.int64)
    excl_cols = np.asarray(excl_cols, dtype=np.int64)

    def run_queries(q0, q1):
        for b0 in range(0, n, block_size):
            b1 = min(b0 + block_size, n)
            scores = cfg.scale_c * (qhat[q0:q1] @ target[b0:b1].T)
            if excl_rows.size:
                sel = ((excl_rows >= q0) & (excl_rows < q1)
                       & (excl_cols >= b0) & (excl_cols < b1))
                scores[excl_rows[sel] - q0, excl_cols[sel] - b0] = -np.inf
            kernels.update_topk(np.ascontiguousarray(scores), b0,
                                top_scores[q0:q1], top_ids[q0:q1],
                                counts[q0:q1])

    if threads <= 1 or q == 1:
        run_queries(0, q)
    else:
        # queries are independent; chunking cannot change any result
        chunk = (q + threads - 1) // threads
        bounds = [(s, min(s + chunk, q)) for s in range(0, q, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda b: run_queries(*b), bounds))
    return top_ids, top_scores, counts


def topk(query, space, k, exclude=(), cfg=None):
    """Top-k (word id, score) pairs for one query vector."""
    ids, scores, counts = topk_batch(query, space, k,
                                     exclude_per_query=[list(exclude)],
                                     cfg=cfg)
    c = int(counts[0])
    return [(int(ids[0, i]), float(scores[0, i])) for i in range(c)]


def mine_hard_negatives(lex, src_space, tgt_space, n_negatives, cfg=None,
                        threads=1):
    """Precompute hard negatives for every dictionary pair.

    For pair (w, v): the n_negatives target words closest to w in the
    given (pre-fine-tuning) spaces, excluding v itself. Spaces must be
    the original ones, mined once before any training.
    """
    cfg = cfg or SimilarityConfig()
    if n_negatives < 1:
        raise ValueError("n_negatives must be >= 1")
    queries = []
    excludes = []
    for s, t in lex.pairs:
        row = src_space.lookup(s)
        gold = tgt_space.vocab.id_of(t)
        if row is None or gold is None:
            raise KeyError(f"pair ({s!r}, {t!r}) not fully in vocabulary; "
                           "filter the lexicon first")
        queries.append(row)
        excludes.append([gold])
    entries = []
    if queries:
        ids, _, counts = topk_batch(np.vstack(queries), tgt_space,
                                    n_negatives, exclude_per_query=excludes,
                                    cfg=cfg, threads=threads)
        for (s, t), row_ids, c in zip(lex.pairs, ids, counts):
            entries.append((s, t, [int(i) for i in row_ids[:c]]))
    return NegativeTable(entries, n_negatives)


def save_negative_table(table, tgt_space, path):
    """TSV: src_word, gold target word, comma-joined negative words."""
    words = tgt_space.vocab.words
    with open(path, "w", encoding="utf-8") as fh:
        for s, t, negs in table.entries:
            fh.write(f"{s}\t{t}\t{','.join(words[i] for i in negs)}\n")


def load_negative_table(path, tgt_space, n_negatives):
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            s, t, negs = line.split("\t")
            ids = [tgt_space.vocab.id_of(w) for w in negs.split(",")] \
                if negs else []
            if any(i is None for i in ids):
                raise KeyError(f"negative word missing from vocabulary: {line!r}")
            entries.append((s, t, ids))
    return NegativeTable(entries, n_negatives)
