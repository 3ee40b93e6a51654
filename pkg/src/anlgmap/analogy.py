"""Analogy categories, completion questions, and the four solvers.

A category is an ordered list of word pairs per language, row-aligned across
languages.  From ``t`` pairs of one language we build ``8 * C(t, 2)``
completion questions: every unordered pair of rows ``(a1, b1), (a2, b2)``
yields eight oriented questions whose expected answers follow the shared
pair offset.  Solvers score the whole vocabulary (minus the three question
words) and return the argmax token, breaking ties by lowest vocabulary
index.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import expit

from .embeddings import Embedding

logger = logging.getLogger(__name__)

KINDS = ("semantic", "syntactic")
SOLVERS = ("3cosadd", "3cosmul", "pairdist", "lrcos")

__all__ = [
    "KINDS",
    "SOLVERS",
    "AnalogyCategory",
    "AnalogyQuestion",
    "SolverResult",
    "LRCosConfig",
    "LRCosClassifier",
    "OutOfVocabularyError",
    "generate_questions",
    "solve_3cosadd",
    "solve_3cosmul",
    "solve_pairdistance",
    "solve_lrcos",
    "train_membership_classifier",
    "category_accuracy",
    "read_category_file",
    "write_category_file",
    "read_corpus",
    "write_corpus",
]


class OutOfVocabularyError(LookupError):
    """A question word is missing from the embedding vocabulary."""


@dataclass(frozen=True)
class AnalogyCategory:
    """A named analogy relation held as aligned word pairs per language."""

    name: str
    kind: str
    pairs_by_language: Mapping[str, tuple[tuple[str, str], ...]]

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        frozen = {
            lang: tuple((str(a), str(b)) for a, b in pairs)
            for lang, pairs in self.pairs_by_language.items()
        }
        if not frozen:
            raise ValueError(f"category {self.name!r} has no languages")
        counts = {lang: len(pairs) for lang, pairs in frozen.items()}
        if len(set(counts.values())) > 1:
            raise ValueError(
                f"category {self.name!r}: pair counts differ across languages {counts}"
            )
        for lang, pairs in frozen.items():
            if len(set(pairs)) != len(pairs):
                raise ValueError(
                    f"category {self.name!r}: duplicate pair in language {lang!r}"
                )
        object.__setattr__(self, "pairs_by_language", frozen)

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(self.pairs_by_language)

    def pairs(self, language: str) -> tuple[tuple[str, str], ...]:
        if language not in self.pairs_by_language:
            raise ValueError(
                f"category {self.name!r} has no language {language!r}"
            )
        return self.pairs_by_language[language]

    def __len__(self) -> int:
        return len(next(iter(self.pairs_by_language.values())))


@dataclass(frozen=True)
class AnalogyQuestion:
    """One completion question ``a : b :: c : ?`` with its expected answer.

    ``gold_side`` records whether the answer is a first-position (0) or
    second-position (1) word of its category, which decides the class the
    LRCos membership classifier is trained on.
    """

    a: str
    b: str
    c: str
    gold: str
    category: str
    gold_side: int = 1


@dataclass(frozen=True)
class SolverResult:
    accuracy: float
    answered: int
    skipped_oov: int
    correct: int
    per_question: tuple | None = None


def generate_questions(category: AnalogyCategory, language: str) -> list[AnalogyQuestion]:
    """All oriented completion questions for one language of a category.

    For pairs with fully distinct words this is exactly ``8 * C(t, 2)``
    questions.  Questions are dropped when the expected answer collides with
    a question word, or when word reuse across pairs makes the question
    internally inconsistent (``a == b`` or ``a == c``); the output is
    deduplicated.
    """
    pairs = category.pairs(language)
    if len(pairs) < 2:
        raise ValueError(
            f"category {category.name!r} needs at least 2 pairs in {language!r}"
        )
    questions: list[AnalogyQuestion] = []
    seen: set[tuple[str, str, str, str]] = set()
    for i in range(len(pairs)):
        a1, b1 = pairs[i]
        for j in range(i + 1, len(pairs)):
            a2, b2 = pairs[j]
            oriented = (
                (a1, b1, a2, b2, 1),
                (b1, a1, b2, a2, 0),
                (a2, a1, b2, b1, 1),
                (b2, b1, a2, a1, 0),
                (a1, a2, b1, b2, 1),
                (b1, b2, a1, a2, 0),
                (a2, b2, a1, b1, 1),
                (b2, a2, b1, a1, 0),
            )
            for a, b, c, gold, side in oriented:
                if gold in (a, b, c) or a == b or a == c:
                    continue
                key = (a, b, c, gold)
                if key in seen:
                    continue
                seen.add(key)
                questions.append(
                    AnalogyQuestion(
                        a=a, b=b, c=c, gold=gold,
                        category=category.name, gold_side=side,
                    )
                )
    return questions


def _question_indices(embedding: Embedding, question: AnalogyQuestion) -> tuple[int, int, int]:
    try:
        return (
            embedding.index(question.a),
            embedding.index(question.b),
            embedding.index(question.c),
        )
    except KeyError as exc:
        raise OutOfVocabularyError(str(exc)) from None


def _candidate_mask(
    embedding: Embedding,
    exclude: Iterable[int],
    candidates: Sequence[str] | None,
) -> np.ndarray:
    if candidates is None:
        mask = np.ones(len(embedding), dtype=bool)
    else:
        mask = np.zeros(len(embedding), dtype=bool)
        for token in candidates:
            if token in embedding:
                mask[embedding.index(token)] = True
    for idx in exclude:
        mask[idx] = False
    if not mask.any():
        raise ValueError("no eligible answer candidates")
    return mask


def _argmax_token(embedding: Embedding, scores: np.ndarray, mask: np.ndarray) -> str:
    scores = np.where(mask, scores, -np.inf)
    return embedding.vocab[int(np.argmax(scores))]


def solve_3cosadd(
    embedding: Embedding,
    question: AnalogyQuestion,
    candidates: Sequence[str] | None = None,
) -> str:
    """Answer by maximising cos(w, b - a + c).  Rows must be unit-normalised."""
    ia, ib, ic = _question_indices(embedding, question)
    target = embedding.matrix[ib] - embedding.matrix[ia] + embedding.matrix[ic]
    norm = np.linalg.norm(target)
    scores = embedding.matrix @ target
    if norm > 0.0:
        scores = scores / norm
    mask = _candidate_mask(embedding, (ia, ib, ic), candidates)
    return _argmax_token(embedding, scores, mask)


def solve_3cosmul(
    embedding: Embedding,
    question: AnalogyQuestion,
    candidates: Sequence[str] | None = None,
    epsilon: float = 1e-3,
) -> str:
    """Answer by the multiplicative score with cosines shifted into [0, 1].

    score(w) = cos01(w, b) * cos01(w, c) / (cos01(w, a) + epsilon) where
    cos01(x) = (cos(x) + 1) / 2; epsilon keeps the ratio finite even when a
    candidate is diametrically opposed to ``a``.
    """
    ia, ib, ic = _question_indices(embedding, question)
    cos_a = (embedding.matrix @ embedding.matrix[ia] + 1.0) / 2.0
    cos_b = (embedding.matrix @ embedding.matrix[ib] + 1.0) / 2.0
    cos_c = (embedding.matrix @ embedding.matrix[ic] + 1.0) / 2.0
    scores = cos_b * cos_c / (cos_a + epsilon)
    mask = _candidate_mask(embedding, (ia, ib, ic), candidates)
    return _argmax_token(embedding, scores, mask)


def solve_pairdistance(
    embedding: Embedding,
    question: AnalogyQuestion,
    candidates: Sequence[str] | None = None,
) -> str:
    """Answer by maximising cos(w - c, b - a); zero offsets are excluded."""
    ia, ib, ic = _question_indices(embedding, question)
    reference = embedding.matrix[ib] - embedding.matrix[ia]
    ref_norm = np.linalg.norm(reference)
    if ref_norm == 0.0:
        raise ValueError("degenerate question: b - a is the zero vector")
    offsets = embedding.matrix - embedding.matrix[ic]
    norms = np.linalg.norm(offsets, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = (offsets @ reference) / (norms * ref_norm)
    mask = _candidate_mask(embedding, (ia, ib, ic), candidates)
    mask = mask & (norms > 0.0)
    if not mask.any():
        raise ValueError("no eligible answer candidates")
    return _argmax_token(embedding, np.nan_to_num(scores, nan=-np.inf), mask)


@dataclass(frozen=True)
class LRCosConfig:
    """Training and sampling settings for the LRCos membership classifier.

    ``leave_one_out`` removes the question's expected answer from the
    positive class before training, avoiding label leakage; switch it off to
    train on the whole class instead.
    """

    seed: int = 0
    negatives_per_positive: int = 10
    l2_strength: float = 1e-3
    learning_rate: float = 1.0
    loss_tolerance: float = 1e-6
    max_epochs: int = 1000
    leave_one_out: bool = True


@dataclass(frozen=True)
class LRCosClassifier:
    """A trained binary logistic-regression class-membership model."""

    weights: np.ndarray
    bias: float
    epochs: int
    final_loss: float
    converged: bool

    def probabilities(self, matrix: np.ndarray) -> np.ndarray:
        return expit(matrix @ self.weights + self.bias)


def train_membership_classifier(
    matrix: np.ndarray,
    positive_idx: Sequence[int],
    negative_idx: Sequence[int],
    config: LRCosConfig = LRCosConfig(),
) -> LRCosClassifier:
    """Fit the binary classifier to convergence.

    Minimises mean cross-entropy plus an L2 penalty on the weights (bias
    unpenalised) with damped Newton epochs: each full-batch step solves the
    regularised curvature system and backtracks (halving) until the loss
    does not increase.  Training stops once an epoch improves the loss by
    less than ``loss_tolerance``, or at ``max_epochs``.
    """
    pos = np.asarray(positive_idx, dtype=int)
    neg = np.asarray(negative_idx, dtype=int)
    features = np.vstack([matrix[pos], matrix[neg]])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    n, d = features.shape
    design = np.hstack([features, np.ones((n, 1))])
    beta = np.zeros(d + 1)
    penalty = np.full(d + 1, config.l2_strength)
    penalty[-1] = 0.0

    def loss_of(coeffs: np.ndarray) -> float:
        logits = design @ coeffs
        # logaddexp form is overflow-safe for large |logits|
        ce = np.logaddexp(0.0, logits) - labels * logits
        return float(ce.mean() + 0.5 * config.l2_strength * (coeffs[:-1] @ coeffs[:-1]))

    loss = loss_of(beta)
    epochs = 0
    converged = False
    for epochs in range(1, config.max_epochs + 1):
        probs = expit(design @ beta)
        gradient = design.T @ (probs - labels) / n + penalty * beta
        curvature = np.maximum(probs * (1.0 - probs), 1e-10)
        hessian = (design.T * curvature) @ design / n + np.diag(penalty + 1e-12)
        step = np.linalg.solve(hessian, gradient)
        scale = config.learning_rate
        candidate = beta - scale * step
        loss_new = loss_of(candidate)
        while loss_new > loss and scale > 1e-12:
            scale /= 2.0
            candidate = beta - scale * step
            loss_new = loss_of(candidate)
        improvement = loss - loss_new
        beta, loss = candidate, loss_new
        if 0.0 <= improvement < config.loss_tolerance:
            converged = True
            break
    return LRCosClassifier(
        weights=beta[:-1],
        bias=float(beta[-1]),
        epochs=epochs,
        final_loss=float(loss),
        converged=converged,
    )


def _class_indices(
    embedding: Embedding, category: AnalogyCategory, side: int
) -> list[int]:
    indices: list[int] = []
    seen: set[int] = set()
    for pair in category.pairs(embedding.language):
        token = pair[side]
        if token in embedding:
            idx = embedding.index(token)
            if idx not in seen:
                seen.add(idx)
                indices.append(idx)
    return indices


def _lrcos_classifier(
    embedding: Embedding,
    category: AnalogyCategory,
    side: int,
    exclude_gold: str | None,
    config: LRCosConfig,
) -> LRCosClassifier:
    class_idx = _class_indices(embedding, category, side)
    if len(class_idx) < 2:
        raise ValueError(
            f"category {category.name!r} has fewer than 2 in-vocabulary "
            f"class words on side {side}"
        )
    positives = list(class_idx)
    if exclude_gold is not None and exclude_gold in embedding:
        gold_idx = embedding.index(exclude_gold)
        positives = [i for i in positives if i != gold_idx]
    pool = np.setdiff1d(np.arange(len(embedding)), np.asarray(class_idx, dtype=int))
    if pool.size == 0:
        raise ValueError("no vocabulary left to sample negatives from")
    n_neg = min(config.negatives_per_positive * len(positives), pool.size)
    rng = np.random.default_rng(config.seed)
    negatives = rng.choice(pool, size=n_neg, replace=False)
    return train_membership_classifier(embedding.matrix, positives, negatives, config)


def solve_lrcos(
    embedding: Embedding,
    category: AnalogyCategory,
    question: AnalogyQuestion,
    config: LRCosConfig = LRCosConfig(),
    candidates: Sequence[str] | None = None,
    _cache: dict | None = None,
) -> str:
    """Answer by maximising P(class membership) * cos(w, c).

    The classifier is trained on the category words sharing the answer's
    pair side, against uniformly sampled negative vectors (seeded, hence
    deterministic).  ``_cache`` lets batch evaluation reuse classifiers
    across questions with the same (side, held-out answer) signature.
    """
    ia, ib, ic = _question_indices(embedding, question)
    exclude_gold = question.gold if config.leave_one_out else None
    key = (question.gold_side, exclude_gold)
    if _cache is not None and key in _cache:
        classifier, probs = _cache[key]
    else:
        classifier = _lrcos_classifier(
            embedding, category, question.gold_side, exclude_gold, config
        )
        probs = classifier.probabilities(embedding.matrix)
        if _cache is not None:
            _cache[key] = (classifier, probs)
    cosines = embedding.matrix @ embedding.matrix[ic]
    scores = probs * cosines
    mask = _candidate_mask(embedding, (ia, ib, ic), candidates)
    return _argmax_token(embedding, scores, mask)


def category_accuracy(
    embedding: Embedding,
    category: AnalogyCategory,
    solver: str,
    config: LRCosConfig = LRCosConfig(),
    candidates: Sequence[str] | None = None,
    keep_per_question: bool = False,
) -> SolverResult:
    """Accuracy of one solver over all in-vocabulary questions of a category.

    Questions touching out-of-vocabulary words are skipped and counted, never
    marked wrong.  The embedding is unit-normalised once up front, so results
    are invariant to uniform positive scaling of the input matrix.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    questions = generate_questions(category, embedding.language)
    unit = embedding.unit_normalized()
    cache: dict = {}
    answered = 0
    correct = 0
    skipped = 0
    per_question: list[tuple[AnalogyQuestion, str, bool]] = []
    for question in questions:
        if any(
            token not in unit
            for token in (question.a, question.b, question.c, question.gold)
        ):
            skipped += 1
            continue
        if solver == "3cosadd":
            predicted = solve_3cosadd(unit, question, candidates)
        elif solver == "3cosmul":
            predicted = solve_3cosmul(unit, question, candidates)
        elif solver == "pairdist":
            predicted = solve_pairdistance(unit, question, candidates)
        else:
            predicted = solve_lrcos(unit, category, question, config, candidates, cache)
        answered += 1
        hit = predicted == question.gold
        correct += int(hit)
        if keep_per_question:
            per_question.append((question, predicted, hit))
    if answered == 0:
        raise ValueError(
            f"category {category.name!r}: no answerable questions in "
            f"{embedding.language!r}"
        )
    return SolverResult(
        accuracy=correct / answered,
        answered=answered,
        skipped_oov=skipped,
        correct=correct,
        per_question=tuple(per_question) if keep_per_question else None,
    )


# ---------------------------------------------------------------------------
# Corpus files: one TSV per category.
#   line 1: "#category <name> <semantic|syntactic>"
#   line 2: tab-separated language codes
#   rows:   tab-separated "word_a/word_b" cells aligned by index
# ---------------------------------------------------------------------------


def write_category_file(category: AnalogyCategory, path: str | Path) -> None:
    path = Path(path)
    languages = category.languages
    lines = [f"#category {category.name} {category.kind}", "\t".join(languages)]
    for row in zip(*(category.pairs(lang) for lang in languages)):
        cells = []
        for word_a, word_b in row:
            for word in (word_a, word_b):
                if "/" in word or "\t" in word:
                    raise ValueError(f"word {word!r} cannot be written to a category file")
            cells.append(f"{word_a}/{word_b}")
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_category_file(path: str | Path) -> AnalogyCategory:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if len(lines) < 2 or not lines[0].startswith("#category "):
        raise ValueError(f"{path}: not a category file")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"{path}: malformed category header {lines[0]!r}")
    _, name, kind = header
    languages = lines[1].split("\t")
    pairs: dict[str, list[tuple[str, str]]] = {lang: [] for lang in languages}
    if len(pairs) != len(languages):
        raise ValueError(f"{path}: duplicate language code in header")
    for lineno, line in enumerate(lines[2:], start=3):
        if not line:
            continue
        cells = line.split("\t")
        if len(cells) != len(languages):
            raise ValueError(
                f"{path}:{lineno}: expected {len(languages)} cells, got {len(cells)}"
            )
        for lang, cell in zip(languages, cells):
            parts = cell.split("/")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValueError(f"{path}:{lineno}: malformed cell {cell!r}")
            pairs[lang].append((parts[0], parts[1]))
    return AnalogyCategory(name=name, kind=kind, pairs_by_language=pairs)


def write_corpus(
    categories: Iterable[AnalogyCategory], directory: str | Path
) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for category in categories:
        path = directory / f"{category.name}.tsv"
        write_category_file(category, path)
        written.append(path)
    return written


def read_corpus(directory: str | Path) -> dict[str, AnalogyCategory]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"{directory}: not a directory")
    corpus: dict[str, AnalogyCategory] = {}
    for path in sorted(directory.glob("*.tsv")):
        category = read_category_file(path)
        if category.name in corpus:
            raise ValueError(f"duplicate category {category.name!r} in {directory}")
        corpus[category.name] = category
    if not corpus:
        raise ValueError(f"{directory}: no category files found")
    return corpus
