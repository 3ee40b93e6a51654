import numpy as np
import pytest

from anlgmap import AnalogyCategory, Embedding


@pytest.fixture
def tiny_embedding():
    """Four orthogonal unit vectors plus two fillers, language 'xx'."""
    matrix = np.eye(6)
    vocab = ("alpha", "beta", "gamma", "delta", "fill1", "fill2")
    return Embedding(language="xx", dim=6, vocab=vocab, matrix=matrix)


def make_embedding(matrix, tokens, language="xx"):
    matrix = np.asarray(matrix, dtype=float)
    return Embedding(
        language=language, dim=matrix.shape[1], vocab=tuple(tokens), matrix=matrix
    )


def make_category(pairs, language="xx", name="CAT", kind="semantic"):
    return AnalogyCategory(
        name=name, kind=kind, pairs_by_language={language: tuple(pairs)}
    )
