"""Evaluation: bilingual lexicon induction (P@k, MRR) and cross-lingual
word-similarity (Spearman correlation against gold scores)."""

from dataclasses import dataclass, field

import numpy as np

from .retrieve import SimilarityConfig, topk_batch


@dataclass
class EvalReport:
    task: str  # bli | xlsim
    metrics: dict
    per_item: list = field(default_factory=list)
    skipped_oov: int = 0

    def save_tsv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"task\t{self.task}\n")
            for name in sorted(self.metrics):
                fh.write(f"{name}\t{_fmt(self.metrics[name])}\n")
            fh.write(f"skipped_oov\t{self.skipped_oov}\n")

    def save_per_item_tsv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for row in self.per_item:
                fh.write("\t".join(str(c) for c in row) + "\n")


def _fmt(value):
    if value is None:
        return "undefined"
    return repr(float(value))


def bli_evaluate(src_space, tgt_space, test, ks=(1, 5), cfg=None, threads=1):
    """Precision@k and MRR over the full target vocabulary.

    Test pairs are grouped by source word into gold sets; a word is
    credited at k when any gold target appears in its top-k. Source
    words missing from the vocabulary count as wrong (skipped_oov);
    missing gold targets are dropped from their set. Metrics are
    averaged over unique source words. *_invocab variants average over
    in-vocabulary source words only.
    """
    cfg = cfg or SimilarityConfig()
    if len(test.pairs) == 0:
        raise ValueError("empty test lexicon")
    ks = sorted(set(int(k) for k in ks))
    kmax = ks[-1]

    gold = {}
    order = []
    for s, t in test.pairs:
        if s not in gold:
            gold[s] = set()
            order.append(s)
        tid = tgt_space.vocab.id_of(t)
        if tid is not None:
            gold[s].add(tid)

    queries, querywords = [], []
    oov = 0
    for s in order:
        row = src_space.lookup(s)
        if row is None:
            oov += 1
            continue
        queries.append(row)
        querywords.append(s)

    hits = {k: 0 for k in ks}
    mrr_sum = 0.0
    per_item = []
    if queries:
        ids, _, counts = topk_batch(np.vstack(queries), tgt_space, kmax,
                                    cfg=cfg, threads=threads)
        for s, row_ids, c in zip(querywords, ids, counts):
            gset = gold[s]
            ranked = row_ids[:c]
            best_rank = None
            for rank, tid in enumerate(ranked, start=1):
                if int(tid) in gset:
                    best_rank = rank
                    break
            for k in ks:
                if best_rank is not None and best_rank <= k:
                    hits[k] += 1
            if best_rank is not None:
                mrr_sum += 1.0 / best_rank
            pred = tgt_space.vocab.words[int(ranked[0])] if c else ""
            gold_words = sorted(tgt_space.vocab.words[t] for t in gset)
            per_item.append((s, "|".join(gold_words), pred,
                             int(best_rank == 1)))

    total = len(order)
    in_vocab = len(querywords)
    metrics = {}
    for k in ks:
        metrics[f"p_at_{k}"] = hits[k] / total
        metrics[f"p_at_{k}_invocab"] = hits[k] / in_vocab if in_vocab else None
    metrics["mrr"] = mrr_sum / total
    metrics["mrr_invocab"] = mrr_sum / in_vocab if in_vocab else None
    metrics["num_source_words"] = float(total)
    return EvalReport("bli", metrics, per_item=per_item, skipped_oov=oov)


def fractional_ranks(xs):
    """Average-ties ranks, 1-based (ties get the mean of their positions)."""
    xs = np.asarray(xs, dtype=np.float64)
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs))
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys):
    """Pearson correlation of fractional ranks; None when either side
    has zero rank variance."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 2:
        raise ValueError("need two equal-length lists of at least 2 values")
    rx = fractional_ranks(xs)
    ry = fractional_ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx @ rx) * (ry @ ry))
    if denom == 0.0:
        return None
    return float((rx @ ry) / denom)


def xlsim_evaluate(src_space, tgt_space, gold, cfg=None):
    """Spearman correlation between gold scores and plain (unscaled)
    cosine similarities. Pairs with either word out of vocabulary are
    dropped and counted."""
    model_scores = []
    gold_scores = []
    per_item = []
    oov = 0
    for s, t, g in gold.triples:
        u = src_space.lookup(s)
        v = tgt_space.lookup(t)
        if u is None or v is None:
            oov += 1
            continue
        u = u.astype(np.float64)
        v = v.astype(np.float64)
        sim = float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))
        model_scores.append(sim)
        gold_scores.append(g)
        per_item.append((s, t, g, sim))
    if len(model_scores) < 2:
        raise ValueError("fewer than 2 scorable pairs")
    rho = spearman(gold_scores, model_scores)
    return EvalReport("xlsim",
                      {"spearman": rho,
                       "num_pairs": float(len(model_scores))},
                      per_item=per_item, skipped_oov=oov)
