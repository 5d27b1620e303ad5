"""Top-k selection kernels.

The selection step of exact retrieval (keeping the k best-scoring target
ids per query, with the deterministic score-then-id tie rule) is the hot
inner loop once the score blocks come out of BLAS. A compiled Cython
kernel is used when available; a pure-numpy merge is the fallback. Both
consume identical score blocks, so their outputs are bit-identical.

Set LEXALIGN_PURE_PYTHON=1 to force the fallback.
"""

import os

from ._selection_py import update_topk as _update_topk_py

if os.environ.get("LEXALIGN_PURE_PYTHON"):
    update_topk = _update_topk_py
    BACKEND = "python"
else:
    try:
        from ._selection import update_topk  # noqa: F401
        BACKEND = "cython"
    except ImportError:
        update_topk = _update_topk_py
        BACKEND = "python"
