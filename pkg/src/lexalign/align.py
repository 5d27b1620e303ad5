"""Closed-form Procrustes solvers and view interpolation.

Two mapping problems share one solver: the square source-to-target map
that turns two monolingual static spaces into a cross-lingual one, and
the rectangular map from the static cross-lingual space into the encoder
space. Interpolation mixes the two views of a word with a factor lambda
(lambda = 1 means encoder only, 0 means mapped static only).
"""

from dataclasses import dataclass

import numpy as np

from . import container
from .embed_store import EmbeddingSpace, ZeroVectorError, l2_normalize
from .lexicon import decouple_pairs


@dataclass
class LinearMap:
    matrix: np.ndarray  # d1 x d2
    kind: str = "general"  # orthonormal_rows | general
    degenerate: bool = False

    @property
    def src_dim(self):
        return self.matrix.shape[0]

    @property
    def dst_dim(self):
        return self.matrix.shape[1]

    def save(self, path):
        container.write_linear_map(path, self.matrix,
                                   self.kind == "orthonormal_rows",
                                   self.degenerate)

    @classmethod
    def load(cls, path):
        matrix, orthonormal, degenerate = container.read_linear_map(path)
        return cls(matrix, "orthonormal_rows" if orthonormal else "general",
                   degenerate)


@dataclass
class InterpolationConfig:
    lam: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("interpolation factor must be in [0, 1]")


def solve_procrustes(X, Y):
    """Row-orthonormal W (d1 x d2) minimizing ||XW - Y||_F.

    Closed form: W = U V^T from the thin SVD of X^T Y. Requires
    d1 <= d2. A rank-deficient cross-covariance (non-unique minimizer)
    succeeds with the degenerate flag set.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ValueError("X and Y must be 2-D with the same row count")
    if X.shape[0] < 1:
        raise ValueError("need at least one observation pair")
    d1, d2 = X.shape[1], Y.shape[1]
    if d1 > d2:
        raise ValueError(f"source dim {d1} exceeds target dim {d2}")
    M = X.T @ Y
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    W = U @ Vt
    degenerate = bool(s[0] == 0.0 or s[-1] <= s[0] * d2 * np.finfo(np.float64).eps)
    return LinearMap(W, kind="orthonormal_rows", degenerate=degenerate)


def induce_clwe(src, tgt, train):
    """Map the source static space onto the target with a square
    orthogonal Procrustes solved on the seed pairs. Both returned spaces
    are re-normalized."""
    if len(train.pairs) == 0:
        raise ValueError("empty training lexicon")
    if src.dim != tgt.dim:
        raise ValueError("square mapping needs equal dimensions")
    if not (src.normalized and tgt.normalized):
        raise ValueError("spaces must be normalized before mapping")
    X = np.vstack([src.lookup(s) for s, _ in train.pairs])
    Y = np.vstack([tgt.lookup(t) for _, t in train.pairs])
    W = solve_procrustes(X, Y)
    mapped = src.matrix.astype(np.float64) @ W.matrix
    mapped_space = EmbeddingSpace(src.vocab, mapped.astype(np.float32))
    return l2_normalize(mapped_space), l2_normalize(tgt), W


def fit_static_to_encoder(static_src, static_tgt, enc_src, enc_tgt, lex):
    """Shared rectangular map from the static cross-lingual space into
    the encoder space, fit on decoupled per-word anchors from both
    languages. Both views are unit-normalized before the fit."""
    anchors = decouple_pairs(lex)
    X_rows, Y_rows = [], []
    for word, side in anchors:
        static = static_src if side == "src" else static_tgt
        enc = enc_src if side == "src" else enc_tgt
        x = static.lookup(word)
        y = enc.lookup(word)
        if x is None or y is None:
            raise KeyError(f"anchor word {word!r} ({side}) missing from a "
                           "vocabulary; filter the lexicon first")
        X_rows.append(x)
        Y_rows.append(y)
    d1 = static_src.dim
    if len(X_rows) < d1:
        raise ValueError(
            f"underdetermined mapping: {len(X_rows)} anchors < {d1} dims")
    X = _unit_rows(np.vstack(X_rows))
    Y = _unit_rows(np.vstack(Y_rows))
    return solve_procrustes(X, Y)


def _unit_rows(m):
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVectorError("zero row cannot be normalized")
    return m / norms[:, None]


def interpolate(static_vec, enc_vec, W, cfg):
    """(1 - lam) * unit(static W) + lam * unit(enc). The result is not
    re-normalized: downstream cosine retrieval is scale-insensitive."""
    mapped = np.asarray(static_vec, dtype=np.float64) @ W.matrix
    n1 = np.linalg.norm(mapped)
    enc = np.asarray(enc_vec, dtype=np.float64)
    n2 = np.linalg.norm(enc)
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroVectorError("cannot interpolate a zero view")
    return (1.0 - cfg.lam) * (mapped / n1) + cfg.lam * (enc / n2)


def interpolate_space(static_space, enc_space, W, cfg):
    """Row-wise interpolation of two spaces over the same vocabulary."""
    if static_space.vocab.words != enc_space.vocab.words:
        a, b = static_space.vocab.words, enc_space.vocab.words
        for i in range(max(len(a), len(b))):
            wa = a[i] if i < len(a) else "<missing>"
            wb = b[i] if i < len(b) else "<missing>"
            if wa != wb:
                raise ValueError(
                    f"vocabulary mismatch at position {i}: {wa!r} vs {wb!r}")
    mapped = _unit_rows(static_space.matrix.astype(np.float64) @ W.matrix)
    enc = _unit_rows(enc_space.matrix)
    out = (1.0 - cfg.lam) * mapped + cfg.lam * enc
    return EmbeddingSpace(static_space.vocab, out.astype(np.float32),
                          normalized=False)
