"""Pure-numpy top-k selection (fallback for the Cython kernel)."""

import numpy as np


def update_topk(scores, base_id, top_scores, top_ids, counts):
    """Merge one block of candidate scores into the running top-k.

    scores: (q, m) float64 block; candidate ids are base_id..base_id+m-1.
    Excluded candidates carry -inf and are never selected.
    top_scores/top_ids are (q, k), kept sorted score-descending with ties
    broken by lower id; counts tracks how many slots are filled.
    Updates the three running arrays in place.
    """
    q, m = scores.shape
    k = top_scores.shape[1]
    ids = np.broadcast_to(base_id + np.arange(m, dtype=np.int64), (q, m))
    all_scores = np.concatenate([top_scores, scores], axis=1)
    all_ids = np.concatenate([top_ids, ids], axis=1)
    # stable two-pass sort: ids ascending first, then scores descending,
    # preserving the id order among equal scores
    idx = np.argsort(all_ids, axis=1, kind="stable")
    s1 = np.take_along_axis(all_scores, idx, axis=1)
    order = np.argsort(-s1, axis=1, kind="stable")
    final = np.take_along_axis(idx, order, axis=1)[:, :k]
    top_scores[:] = np.take_along_axis(all_scores, final, axis=1)
    top_ids[:] = np.take_along_axis(all_ids, final, axis=1)
    empty = np.isneginf(top_scores)
    top_ids[empty] = -1
    counts[:] = k - empty.sum(axis=1)
