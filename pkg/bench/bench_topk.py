"""Compare the compiled and pure-Python top-k selection kernels.

The score blocks feeding both kernels come from the same BLAS matmul, so
the two backends return bit-identical results; the only question is how
much the compiled insertion loop saves over the numpy merge. Run:

    python3 bench/bench_topk.py [--n 200000] [--q 2000] [--d 300] [--k 10]
"""

import argparse
import time

import numpy as np

from lexalign.kernels import BACKEND, _selection_py
from lexalign.embed_store import EmbeddingSpace, Vocabulary
from lexalign import retrieve

try:
    from lexalign.kernels import _selection
except ImportError:
    _selection = None


def bench_kernel(kernel, scores_blocks, k, repeats=3):
    q = scores_blocks[0].shape[0]
    best = float("inf")
    for _ in range(repeats):
        top_scores = np.full((q, k), -np.inf)
        top_ids = np.full((q, k), -1, dtype=np.int64)
        counts = np.zeros(q, dtype=np.int64)
        start = time.perf_counter()
        base = 0
        for block in scores_blocks:
            kernel.update_topk(block.copy(), base, top_scores, top_ids,
                               counts)
            base += block.shape[1]
        best = min(best, time.perf_counter() - start)
    return best, top_ids


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200000,
                    help="target vocabulary size")
    ap.add_argument("--q", type=int, default=2000, help="query count")
    ap.add_argument("--d", type=int, default=300, help="dimensionality")
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--block", type=int, default=8192)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    space = EmbeddingSpace(Vocabulary([f"w{i}" for i in range(args.n)]),
                           rng.normal(size=(args.n, args.d))
                           .astype(np.float32))
    queries = rng.normal(size=(args.q, args.d))

    start = time.perf_counter()
    results = retrieve.topk_batch(queries, space, args.k,
                                  block_size=args.block)
    total = time.perf_counter() - start
    print(f"end-to-end topk_batch (backend: {BACKEND}): "
          f"{total:.3f}s for {args.q} queries over {args.n} rows")

    # isolate the selection kernels on identical precomputed score blocks
    qm = queries / np.linalg.norm(queries, axis=1, keepdims=True)
    tm = space.matrix.astype(np.float64)
    tm /= np.linalg.norm(tm, axis=1, keepdims=True)
    blocks = [20.0 * (qm @ tm[i:i + args.block].T)
              for i in range(0, args.n, args.block)]

    t_py, ids_py = bench_kernel(_selection_py, blocks, args.k)
    print(f"selection python: {t_py:.3f}s")
    if _selection is None:
        print("selection cython: unavailable (compiled kernel not built)")
        return
    t_cy, ids_cy = bench_kernel(_selection, blocks, args.k)
    print(f"selection cython: {t_cy:.3f}s ({t_py / t_cy:.1f}x vs python)")
    print(f"results identical: {np.array_equal(ids_py, ids_cy)}")


if __name__ == "__main__":
    main()
