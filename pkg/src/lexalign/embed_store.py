"""Loading, validating, normalizing and serving type-level embedding spaces.

The interchange format is the fastText .vec text format: a "<count> <dim>"
header followed by one "<word> <v1> ... <vd>" line per word, frequency-sorted.
A binary sidecar cache (see container.py) avoids re-parsing large files.
"""

from dataclasses import dataclass, field

import numpy as np

from . import container


class FormatError(ValueError):
    """Malformed .vec input (bad header, wrong row dimension, ...)."""


class ZeroVectorError(ValueError):
    pass


@dataclass
class Vocabulary:
    words: list
    index: dict = field(default=None)

    def __post_init__(self):
        if self.index is None:
            self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate words in vocabulary")

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def id_of(self, word):
        """Dense 0-based id of the word, or None if absent."""
        return self.index.get(word)


@dataclass
class EmbeddingSpace:
    vocab: Vocabulary
    matrix: np.ndarray  # |V| x d, float32
    normalized: bool = False
    # parse bookkeeping: how many input rows were dropped and why
    skipped_duplicates: int = 0
    skipped_malformed_words: int = 0

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be 2-D")
        if self.matrix.shape[0] != len(self.vocab):
            raise ValueError("matrix row count does not match vocabulary size")
        if self.matrix.shape[1] <= 0:
            raise ValueError("dimension must be positive")

    @property
    def dim(self):
        return self.matrix.shape[1]

    def lookup(self, word):
        """Row vector for the word, or None if the word is absent."""
        i = self.vocab.id_of(word)
        if i is None:
            return None
        return self.matrix[i]


def load_text_embeddings(path, max_words=None):
    """Parse a .vec file, keeping the first min(count, max_words) valid rows.

    Rows whose word contains a space (token count > dim + 1) and duplicate
    words are skipped and counted, mirroring what real fastText dumps
    require. A row with too few values is a hard FormatError.
    """
    words = []
    index = {}
    rows = []
    skipped_dup = 0
    skipped_word = 0
    with open(path, encoding="utf-8", errors="surrogateescape") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError(f"{path}: malformed header {header.strip()!r}")
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"{path}: malformed header {header.strip()!r}")
        if count < 0 or dim <= 0:
            raise FormatError(f"{path}: malformed header {header.strip()!r}")
        limit = count if max_words is None else min(count, max_words)
        for lineno, line in enumerate(fh, start=2):
            if len(words) >= limit:
                break
            line = line.rstrip("\n")
            if not line:
                continue
            tokens = line.split(" ")
            # trailing space after the vector is common in fastText dumps
            while tokens and tokens[-1] == "":
                tokens.pop()
            if len(tokens) < dim + 1:
                raise FormatError(
                    f"{path}:{lineno}: {len(tokens) - 1} values, expected {dim}")
            try:
                vec = np.array(tokens[-dim:], dtype=np.float32)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric vector value")
            if len(tokens) > dim + 1:
                # the "word" itself contains spaces; reject the row
                skipped_word += 1
                continue
            word = tokens[0]
            if word in index:
                skipped_dup += 1
                continue
            index[word] = len(words)
            words.append(word)
            rows.append(vec)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return EmbeddingSpace(Vocabulary(words, index), matrix,
                          normalized=False,
                          skipped_duplicates=skipped_dup,
                          skipped_malformed_words=skipped_word)


def write_text_embeddings(space, path):
    """Write back to .vec with 6 significant digits per value."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(space.vocab)} {space.dim}\n")
        for word, row in zip(space.vocab.words, space.matrix):
            vals = " ".join(f"{v:.6g}" for v in row)
            fh.write(f"{word} {vals}\n")


def l2_normalize(space):
    """Return a copy with unit-norm rows. Norms accumulate in float64."""
    norms = np.linalg.norm(space.matrix.astype(np.float64), axis=1)
    zero = np.where(norms == 0.0)[0]
    if zero.size:
        raise ZeroVectorError(
            f"zero vector for word {space.vocab.words[zero[0]]!r}")
    matrix = (space.matrix.astype(np.float64) / norms[:, None]).astype(np.float32)
    return EmbeddingSpace(space.vocab, matrix, normalized=True,
                          skipped_duplicates=space.skipped_duplicates,
                          skipped_malformed_words=space.skipped_malformed_words)


def save_cache(space, path):
    container.write_embeddings(path, space.vocab.words, space.matrix,
                               space.normalized)


def load_cache(path):
    words, matrix, normalized = container.read_embeddings(path)
    return EmbeddingSpace(Vocabulary(words), matrix, normalized=normalized)
