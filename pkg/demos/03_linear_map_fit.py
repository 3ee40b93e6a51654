"""Fitting the best linear map between two embedding spaces.

The linearity score is the negated Frobenius residual of the best linear
map over row-aligned translation vectors: 0 means an exact linear map
exists.  An affinely related copy of a space fits exactly (mean centring
removes the shift); a piecewise-rotated copy does not.
"""

import numpy as np

from anlgmap import build_aligned, category_dictionary, fit_linear_closed, fit_linear_gd
from anlgmap import AnalogyCategory
from anlgmap.synthetic import (
    Distortion,
    SynthSpec,
    apply_affine,
    apply_distortion,
    gen_analogy_space,
    random_affine,
)

emb_x, category = gen_analogy_space(SynthSpec(n_pairs=8, dim=6, seed=3))
rng = np.random.default_rng(3)
M, b = random_affine(6, rng)

pairs = category.pairs("xa")
spanning = AnalogyCategory(
    "SYN", "semantic", {"xa": pairs, "xb": pairs}
)

print("case 1: the second space is an exact affine image of the first")
emb_y = apply_affine(emb_x, M, b, language="xb")
pair = build_aligned(emb_x, emb_y, category_dictionary(spanning, "xa", "xb"))
gd = fit_linear_gd(pair)
closed = fit_linear_closed(pair)
print(f"  gradient-descent  s_lmp={gd.s_lmp:+.2e} ({gd.iterations} iterations)")
print(f"  closed-form       s_lmp={closed.s_lmp:+.2e}")

print("\ncase 2: the second space is warped non-affinely before mapping")
emb_y2 = apply_affine(
    apply_distortion(emb_x, Distortion.split_linear(40.0)), M, b, language="xb"
)
pair2 = build_aligned(emb_x, emb_y2, category_dictionary(spanning, "xa", "xb"))
gd2 = fit_linear_gd(pair2)
closed2 = fit_linear_closed(pair2)
print(f"  gradient-descent  s_lmp={gd2.s_lmp:+.4f}")
print(f"  closed-form       s_lmp={closed2.s_lmp:+.4f}")
print(f"  |gd - closed| residual gap: {abs(gd2.residual - closed2.residual):.2e}")
