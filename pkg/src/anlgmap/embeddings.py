"""Loading, indexing, and preprocessing of monolingual word-embedding spaces.

The on-disk format is the plain text vector format: a header line
``"<count> <dim>"`` followed by one ``"<token> f1 ... fdim"`` line per word,
single-space separated, UTF-8.  Everything is parsed into float64 regardless
of the precision written in the file.
"""

from __future__ import annotations

import hashlib
import logging
import os
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "Embedding",
    "VectorView",
    "load_text_vectors",
    "load_text_vectors_cached",
    "mean_center",
    "frobenius_normalize",
    "unit_normalize_rows",
]


def _nfc(token: str) -> str:
    return unicodedata.normalize("NFC", token)


@dataclass(frozen=True)
class VectorView:
    """A single word vector: the token and its (finite) values."""

    token: str
    values: np.ndarray


@dataclass(frozen=True)
class Embedding:
    """An immutable monolingual embedding space.

    ``vocab`` holds each token exactly once (NFC-normalised, case-sensitive)
    and ``matrix`` holds one float64 row per token, in vocab order.  The
    matrix is frozen after construction so instances can be shared across
    threads.
    """

    language: str
    dim: int
    vocab: tuple[str, ...]
    matrix: np.ndarray
    duplicates: tuple[str, ...] = ()
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        matrix = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.float64))
        if matrix.ndim != 2:
            raise ValueError(f"embedding matrix must be 2-D, got shape {matrix.shape}")
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if matrix.shape != (len(self.vocab), self.dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match "
                f"{len(self.vocab)} tokens x dim {self.dim}"
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError("embedding matrix contains non-finite values")
        index = {token: i for i, token in enumerate(self.vocab)}
        if len(index) != len(self.vocab):
            raise ValueError("vocabulary contains duplicate tokens")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "vocab", tuple(self.vocab))
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return _nfc(token) in self._index

    def index(self, token: str) -> int:
        """Row index of ``token``; raises KeyError if out of vocabulary."""
        key = _nfc(token)
        if key not in self._index:
            raise KeyError(f"token {token!r} not in {self.language} vocabulary")
        return self._index[key]

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.index(token)]

    def lookup(self, token: str) -> VectorView:
        idx = self.index(token)
        return VectorView(token=self.vocab[idx], values=self.matrix[idx])

    def with_matrix(self, matrix: np.ndarray, language: str | None = None) -> "Embedding":
        """Same vocabulary, new values (used by synthetic transforms)."""
        return Embedding(
            language=self.language if language is None else language,
            dim=int(matrix.shape[1]),
            vocab=self.vocab,
            matrix=matrix,
            duplicates=self.duplicates,
        )

    def unit_normalized(self) -> "Embedding":
        return self.with_matrix(unit_normalize_rows(self.matrix))


def load_text_vectors(
    path: str | Path,
    limit: int | None = None,
    *,
    language: str = "und",
    lowercase: bool = False,
) -> Embedding:
    """Parse a text vector file into an :class:`Embedding`.

    Keeps at most ``limit`` rows, in file order.  Duplicate tokens keep their
    first occurrence; the dropped tokens are reported on the returned
    embedding and logged.  Raises ValueError on a malformed header, a row
    whose field count does not match the header dimension (the message names
    the offending line), non-finite values, or an empty file.
    """
    path = Path(path)
    if limit is not None and limit <= 0:
        raise ValueError(f"limit must be positive, got {limit}")
    vocab: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[str] = set()
    duplicates: list[str] = []
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
        if not header:
            raise ValueError(f"{path}: empty file")
        fields = header.split()
        if len(fields) != 2:
            raise ValueError(f"{path}: malformed header {header.strip()!r}")
        try:
            count, dim = int(fields[0]), int(fields[1])
        except ValueError:
            raise ValueError(f"{path}: malformed header {header.strip()!r}") from None
        if count < 0 or dim <= 0:
            raise ValueError(f"{path}: malformed header {header.strip()!r}")
        for lineno, line in enumerate(handle, start=2):
            if limit is not None and len(vocab) >= limit:
                break
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != dim + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            token = _nfc(parts[0])
            if lowercase:
                token = token.lower()
            try:
                values = np.fromiter(map(float, parts[1:]), dtype=np.float64, count=dim)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: unparseable vector value") from None
            if not np.all(np.isfinite(values)):
                raise ValueError(f"{path}:{lineno}: non-finite vector value")
            if token in seen:
                duplicates.append(token)
                continue
            seen.add(token)
            vocab.append(token)
            rows.append(values)
    if not vocab:
        raise ValueError(f"{path}: no vectors loaded")
    if duplicates:
        logger.warning(
            "%s: kept first occurrence of %d duplicate token(s)", path, len(duplicates)
        )
    return Embedding(
        language=language,
        dim=dim,
        vocab=tuple(vocab),
        matrix=np.vstack(rows),
        duplicates=tuple(duplicates),
    )


def _cache_key(path: Path, limit: int | None, lowercase: bool) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    digest.update(f"|limit={limit}|lower={lowercase}".encode())
    return digest.hexdigest()


def load_text_vectors_cached(
    path: str | Path,
    limit: int | None = None,
    *,
    language: str = "und",
    lowercase: bool = False,
    cache_dir: str | Path | None = None,
) -> Embedding:
    """Like :func:`load_text_vectors`, backed by an on-disk parse cache.

    The cache directory comes from ``cache_dir`` or the ``ANLGMAP_CACHE``
    environment variable; entries are keyed by a checksum of the file
    contents plus the load options, so edited files invalidate themselves.
    """
    path = Path(path)
    cache_dir = cache_dir if cache_dir is not None else os.environ.get("ANLGMAP_CACHE")
    if not cache_dir:
        return load_text_vectors(path, limit, language=language, lowercase=lowercase)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    entry = cache_dir / f"{_cache_key(path, limit, lowercase)}.npz"
    if entry.exists():
        data = np.load(entry, allow_pickle=False)
        return Embedding(
            language=language,
            dim=int(data["matrix"].shape[1]),
            vocab=tuple(str(t) for t in data["vocab"]),
            matrix=data["matrix"],
            duplicates=tuple(str(t) for t in data["duplicates"]),
        )
    embedding = load_text_vectors(path, limit, language=language, lowercase=lowercase)
    np.savez(
        entry,
        vocab=np.array(embedding.vocab, dtype=np.str_),
        matrix=embedding.matrix,
        duplicates=np.array(embedding.duplicates, dtype=np.str_),
    )
    return embedding


def mean_center(matrix: np.ndarray) -> np.ndarray:
    """Subtract the mean row so every column of the result sums to zero."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError("mean_center requires a non-empty 2-D matrix")
    return matrix - matrix.mean(axis=0, keepdims=True)


def frobenius_normalize(matrix: np.ndarray) -> np.ndarray:
    """Scale a matrix so its Frobenius norm is exactly 1."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError("frobenius_normalize requires a non-empty 2-D matrix")
    norm = np.linalg.norm(matrix)
    if norm == 0.0:
        raise ValueError("cannot normalize an all-zero matrix")
    return matrix / norm


def unit_normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale every row to Euclidean norm 1; rejects zero rows by index."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.size == 0:
        raise ValueError("unit_normalize_rows requires a non-empty 2-D matrix")
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"cannot unit-normalize zero row at index {int(zero[0])}")
    return matrix / norms[:, None]
