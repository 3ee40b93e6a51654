"""Row-aligned bilingual matrices and the best linear map between them.

Given aligned matrices X (n x d_x) and Y (n x d_y) built from a translation
dictionary, the fit minimises ``||M X^T - Y^T||_F`` over matrices M of shape
(d_y, d_x).  Both matrices are mean-centred and scaled to unit Frobenius
norm first, so the fitted residual is comparable across language pairs; the
linearity score is the negated residual (0 means an exact linear map
exists).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .analogy import AnalogyCategory
from .embeddings import Embedding, frobenius_normalize, mean_center

logger = logging.getLogger(__name__)

__all__ = [
    "BilingualDictionary",
    "AlignedMatrixPair",
    "GDConfig",
    "LinearFit",
    "load_muse_dictionary",
    "category_dictionary",
    "build_aligned",
    "fit_linear_gd",
    "fit_linear_closed",
    "residual_norm",
]


@dataclass(frozen=True)
class BilingualDictionary:
    """Ordered translation entries from one language to another."""

    source_lang: str
    target_lang: str
    entries: tuple[tuple[str, str], ...]
    _multi: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        entries = tuple((str(s), str(t)) for s, t in self.entries)
        if len(set(entries)) != len(entries):
            raise ValueError("dictionary contains duplicate (source, target) entries")
        multi: dict[str, list[str]] = {}
        for source, target in entries:
            multi.setdefault(source, []).append(target)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_multi", {k: tuple(v) for k, v in multi.items()})

    def translations(self, word: str) -> tuple[str, ...]:
        return self._multi.get(word, ())

    def __len__(self) -> int:
        return len(self.entries)


def load_muse_dictionary(
    path: str | Path, source_lang: str, target_lang: str
) -> BilingualDictionary:
    """Read a two-column (tab or space separated) translation file.

    Duplicate entries keep their first occurrence and are logged.
    """
    path = Path(path)
    entries: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    dropped = 0
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split()
            if len(fields) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 'source target', got {line!r}"
                )
            entry = (fields[0], fields[1])
            if entry in seen:
                dropped += 1
                continue
            seen.add(entry)
            entries.append(entry)
    if not entries:
        raise ValueError(f"{path}: empty dictionary")
    if dropped:
        logger.warning("%s: dropped %d duplicate entries", path, dropped)
    return BilingualDictionary(source_lang, target_lang, tuple(entries))


def category_dictionary(
    category: AnalogyCategory, source_lang: str, target_lang: str
) -> BilingualDictionary:
    """Use a category's own aligned word pairs (both elements) as a lexicon."""
    source_pairs = category.pairs(source_lang)
    target_pairs = category.pairs(target_lang)
    entries: list[tuple[str, str]] = []
    seen: set[tuple[str, str]] = set()
    for (sa, sb), (ta, tb) in zip(source_pairs, target_pairs):
        for entry in ((sa, ta), (sb, tb)):
            if entry not in seen:
                seen.add(entry)
                entries.append(entry)
    return BilingualDictionary(source_lang, target_lang, tuple(entries))


@dataclass(frozen=True)
class AlignedMatrixPair:
    """Two row-aligned matrices; row i of X and Y is one translation pair."""

    X: np.ndarray
    Y: np.ndarray
    row_words: tuple[tuple[str, str], ...]
    preprocessed: bool

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        Y = np.asarray(self.Y, dtype=np.float64)
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ValueError(
                f"aligned matrices need matching row counts, got {X.shape} / {Y.shape}"
            )
        if len(self.row_words) != X.shape[0]:
            raise ValueError("row_words length does not match the matrices")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "row_words", tuple(self.row_words))

    def __len__(self) -> int:
        return self.X.shape[0]


def build_aligned(
    embedding_x: Embedding,
    embedding_y: Embedding,
    dictionary: BilingualDictionary,
    word_filter: Iterable[str] | None = None,
) -> AlignedMatrixPair:
    """Aligned, mean-centred, Frobenius-normalised matrices from a lexicon.

    Keeps the dictionary entries whose tokens are present in both
    vocabularies (and in ``word_filter`` when given), in dictionary order.
    """
    if dictionary.source_lang != embedding_x.language:
        raise ValueError(
            f"dictionary source {dictionary.source_lang!r} does not match "
            f"embedding language {embedding_x.language!r}"
        )
    if dictionary.target_lang != embedding_y.language:
        raise ValueError(
            f"dictionary target {dictionary.target_lang!r} does not match "
            f"embedding language {embedding_y.language!r}"
        )
    allowed = set(word_filter) if word_filter is not None else None
    rows_x: list[np.ndarray] = []
    rows_y: list[np.ndarray] = []
    kept: list[tuple[str, str]] = []
    for source, target in dictionary.entries:
        if source not in embedding_x or target not in embedding_y:
            continue
        if allowed is not None and (source not in allowed or target not in allowed):
            continue
        rows_x.append(embedding_x.vector(source))
        rows_y.append(embedding_y.vector(target))
        kept.append((source, target))
    if not kept:
        raise ValueError("no dictionary entries survive the vocabulary filter")
    X = frobenius_normalize(mean_center(np.vstack(rows_x)))
    Y = frobenius_normalize(mean_center(np.vstack(rows_y)))
    return AlignedMatrixPair(X=X, Y=Y, row_words=tuple(kept), preprocessed=True)


@dataclass(frozen=True)
class GDConfig:
    learning_rate: float = 0.1
    rel_tolerance: float = 1e-10
    max_iterations: int = 10_000


@dataclass(frozen=True)
class LinearFit:
    """Result of fitting M: the map matrix, its residual, and the score."""

    M_star: np.ndarray
    residual: float
    s_lmp: float
    iterations: int
    converged: bool


def residual_norm(M: np.ndarray, pair: AlignedMatrixPair) -> float:
    """Frobenius norm of the fit error of M on an aligned pair."""
    return float(np.linalg.norm(pair.X @ M.T - pair.Y))


def _check_preprocessed(pair: AlignedMatrixPair) -> None:
    if not pair.preprocessed:
        raise ValueError("aligned pair must be preprocessed (centred and normalised)")


def fit_linear_gd(pair: AlignedMatrixPair, config: GDConfig = GDConfig()) -> LinearFit:
    """Minimise the fit residual by full-batch gradient descent.

    Starts from the identity (its leading block when dimensions differ),
    halves the step size whenever a step would increase the residual, and
    stops when the relative residual change drops below ``rel_tolerance``
    or the iteration budget runs out.
    """
    _check_preprocessed(pair)
    if len(pair) < 1:
        raise ValueError("aligned pair has no rows")
    A = pair.X.T  # (d_x, n)
    B = pair.Y.T  # (d_y, n)
    d_x, d_y = A.shape[0], B.shape[0]
    M = np.eye(d_y, d_x)
    lr = config.learning_rate
    loss = float(np.linalg.norm(M @ A - B))
    iterations = 0
    converged = False
    for iterations in range(1, config.max_iterations + 1):
        gradient = (M @ A - B) @ A.T
        M_new = M - lr * gradient
        loss_new = float(np.linalg.norm(M_new @ A - B))
        if loss_new > loss:
            lr /= 2.0
            continue
        improvement = loss - loss_new
        M, loss = M_new, loss_new
        if improvement <= config.rel_tolerance * max(loss, 1e-30):
            converged = True
            break
    residual = float(np.linalg.norm(M @ A - B))
    return LinearFit(
        M_star=M,
        residual=residual,
        s_lmp=-residual,
        iterations=iterations,
        converged=converged,
    )


def fit_linear_closed(pair: AlignedMatrixPair) -> LinearFit:
    """Least-squares solution via the pseudoinverse (minimum-norm on ties)."""
    _check_preprocessed(pair)
    if len(pair) < 1:
        raise ValueError("aligned pair has no rows")
    solution, *_ = np.linalg.lstsq(pair.X, pair.Y, rcond=None)
    M = solution.T
    residual = residual_norm(M, pair)
    return LinearFit(
        M_star=M, residual=residual, s_lmp=-residual, iterations=0, converged=True
    )
