"""Loading text vector files and preprocessing embedding matrices.

Writes a tiny vector file, loads it back, and walks through the three
matrix preprocessing steps used everywhere else: mean centring, Frobenius
normalisation, and row-wise unit normalisation.
"""

import tempfile
from pathlib import Path

import numpy as np

from anlgmap import (
    frobenius_normalize,
    load_text_vectors,
    mean_center,
    unit_normalize_rows,
)

workdir = Path(tempfile.mkdtemp())
vec_path = workdir / "toy.vec"
vec_path.write_text(
    "4 3\n"
    "king 0.9 0.1 0.2\n"
    "queen 0.8 0.7 0.1\n"
    "man 0.4 -0.2 0.3\n"
    "woman 0.3 0.4 0.2\n",
    encoding="utf-8",
)

emb = load_text_vectors(vec_path, language="en")
print(f"loaded {len(emb)} vectors of dimension {emb.dim} for language {emb.language!r}")
print("vocabulary:", emb.vocab)

view = emb.lookup("queen")
print(f"lookup('queen') -> {view.values}")

print("\nmean centring makes every column sum to zero:")
centred = mean_center(emb.matrix)
print("column sums before:", emb.matrix.sum(axis=0).round(6))
print("column sums after: ", centred.sum(axis=0).round(12))

print("\nFrobenius normalisation rescales the whole matrix to norm 1:")
normalised = frobenius_normalize(centred)
print("norm before:", round(float(np.linalg.norm(centred)), 6))
print("norm after: ", round(float(np.linalg.norm(normalised)), 12))

print("\nrow-wise unit normalisation is what the cosine solvers expect:")
unit = unit_normalize_rows(emb.matrix)
print("row norms:", np.linalg.norm(unit, axis=1).round(12))
