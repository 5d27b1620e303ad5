"""Binary container ("LXRW1") for embedding caches, linear maps and adapter
checkpoints.

Layout: 5 magic bytes, one record-tag byte, then a tag-specific payload.
All integers are little-endian; matrices are stored row-major.
"""

import struct

import numpy as np

MAGIC = b"LXRW1"

TAG_EMBEDDINGS = b"E"
TAG_LINEAR_MAP = b"M"
TAG_ADAPTER = b"A"


class ContainerError(ValueError):
    pass


def _write_word(fh, word):
    data = word.encode("utf-8")
    fh.write(struct.pack("<I", len(data)))
    fh.write(data)


def _read_word(fh):
    (n,) = struct.unpack("<I", fh.read(4))
    return fh.read(n).decode("utf-8")


def _read_header(fh, expected_tag):
    magic = fh.read(5)
    if magic != MAGIC:
        raise ContainerError(f"bad magic bytes {magic!r}, expected {MAGIC!r}")
    tag = fh.read(1)
    if tag != expected_tag:
        raise ContainerError(f"record tag {tag!r}, expected {expected_tag!r}")


def write_embeddings(path, words, matrix, normalized):
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    count, dim = matrix.shape
    if count != len(words):
        raise ContainerError("word count does not match matrix rows")
    with open(path, "wb") as fh:
        fh.write(MAGIC + TAG_EMBEDDINGS)
        fh.write(struct.pack("<BII", 1 if normalized else 0, count, dim))
        fh.write(matrix.tobytes())
        for w in words:
            _write_word(fh, w)


def read_embeddings(path):
    with open(path, "rb") as fh:
        _read_header(fh, TAG_EMBEDDINGS)
        normalized, count, dim = struct.unpack("<BII", fh.read(9))
        matrix = np.frombuffer(fh.read(4 * count * dim), dtype="<f4")
        matrix = matrix.reshape(count, dim).copy()
        words = [_read_word(fh) for _ in range(count)]
    return words, matrix, bool(normalized)


def write_linear_map(path, matrix, kind_orthonormal, degenerate):
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    d1, d2 = matrix.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC + TAG_LINEAR_MAP)
        fh.write(struct.pack("<BBII", 1 if kind_orthonormal else 0,
                             1 if degenerate else 0, d1, d2))
        fh.write(matrix.tobytes())


def read_linear_map(path):
    with open(path, "rb") as fh:
        _read_header(fh, TAG_LINEAR_MAP)
        kind, degenerate, d1, d2 = struct.unpack("<BBII", fh.read(10))
        matrix = np.frombuffer(fh.read(4 * d1 * d2), dtype="<f4")
        matrix = matrix.reshape(d1, d2).copy()
    return matrix, bool(kind), bool(degenerate)


def write_adapter(path, A, m, v, step_count):
    """Adapter state is stored in float64: optimizer moments need the
    full precision to resume deterministically."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    d = A.shape[0]
    if A.shape != (d, d) or m.shape != (d, d) or v.shape != (d, d):
        raise ContainerError("adapter matrices must be square and same shape")
    with open(path, "wb") as fh:
        fh.write(MAGIC + TAG_ADAPTER)
        fh.write(struct.pack("<IQ", d, step_count))
        fh.write(A.tobytes())
        fh.write(np.ascontiguousarray(m, dtype=np.float64).tobytes())
        fh.write(np.ascontiguousarray(v, dtype=np.float64).tobytes())


def read_adapter(path):
    with open(path, "rb") as fh:
        _read_header(fh, TAG_ADAPTER)
        d, step_count = struct.unpack("<IQ", fh.read(12))
        n = 8 * d * d
        A = np.frombuffer(fh.read(n), dtype="<f8").reshape(d, d).copy()
        m = np.frombuffer(fh.read(n), dtype="<f8").reshape(d, d).copy()
        v = np.frombuffer(fh.read(n), dtype="<f8").reshape(d, d).copy()
    return A, m, v, step_count
