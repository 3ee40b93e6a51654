"""Controlled synthetic embedding spaces and distortion sweeps.

The generator plants ``t`` word pairs that share one exact offset vector
while every planted vector keeps unit norm, so the cosine-based solvers see
the clean parallelogram geometry unchanged.  Construction (all randomness
from NumPy's PCG64 ``default_rng``, seeded by ``SynthSpec.seed``):

* the shared offset is ``0.5 * e1`` (exactly representable, so noise-free
  offsets are bitwise equal);
* first-position vectors sit on the slice ``x1 = -0.25`` of the unit
  sphere, spread over a reserved block of coordinates with a minimum
  angular separation; second-position vectors add the offset;
* filler vocabulary lives in its own trailing coordinate block (orthogonal
  to every pair word), which keeps both pair sides linearly separable from
  the rest.  Fillers need ``dim >= 5``; below that they share the pair
  block and the perfect-accuracy guarantee no longer holds.

Distortions warp a space non-affinely: the radial warp rescales each vector
by ``1 + level * ||x||^2`` (directions unchanged, so row-normalising
solvers are blind to it, while matrix fits are not), and the split warp
rotates the two half-spaces ``x1 >= 0`` / ``x1 < 0`` by opposite angles.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .analogy import AnalogyCategory, LRCosConfig, category_accuracy
from .embeddings import Embedding
from .mapping import GDConfig, build_aligned, category_dictionary, fit_linear_closed, fit_linear_gd
from .stats import s_pae, spearman_rho

logger = logging.getLogger(__name__)

OFFSET_LENGTH = 0.75  # dyadic, so noise-free offsets are bitwise identical
DISTORTION_KINDS = ("none", "radial", "split_linear")

__all__ = [
    "Distortion",
    "SynthSpec",
    "SweepRow",
    "gen_analogy_space",
    "apply_affine",
    "apply_distortion",
    "random_rotation",
    "random_affine",
    "gen_offset_preserving_pair",
    "build_sweep_grid",
    "evaluate_point",
    "theorem_sweep",
    "sweep_correlation",
    "shuffled_control",
    "pair_offsets",
]


@dataclass(frozen=True)
class Distortion:
    """A non-affine warp: 'none', 'radial' (level = strength), or
    'split_linear' (level = rotation angle in degrees)."""

    kind: str = "none"
    level: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in DISTORTION_KINDS:
            raise ValueError(f"unknown distortion {self.kind!r}")
        if self.level < 0.0:
            raise ValueError(f"distortion level must be >= 0, got {self.level}")

    @classmethod
    def none(cls) -> "Distortion":
        return cls("none", 0.0)

    @classmethod
    def radial(cls, level: float) -> "Distortion":
        return cls("radial", level)

    @classmethod
    def split_linear(cls, angle_degrees: float) -> "Distortion":
        return cls("split_linear", angle_degrees)


@dataclass(frozen=True)
class SynthSpec:
    """Reproducible recipe for one synthetic space: same spec, same bits."""

    n_pairs: int
    dim: int
    noise_sigma: float = 0.0
    distortion: Distortion = Distortion()
    seed: int = 0
    n_fillers: int = 40
    language: str = "xa"
    category: str = "SYN"

    def __post_init__(self) -> None:
        if self.n_pairs < 2:
            raise ValueError(f"need at least 2 pairs, got {self.n_pairs}")
        if self.dim < 2:
            raise ValueError(f"need dim >= 2, got {self.dim}")
        if self.noise_sigma < 0.0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.n_fillers < 0:
            raise ValueError(f"n_fillers must be >= 0, got {self.n_fillers}")


def _spread_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """Unit directions whose pairwise dots stay inside a positive band.

    The lower bound keeps every within-side cosine positive (so no answer
    can be outscored by a neutral filler); the upper bound keeps the words
    distinguishable.  Bounds relax slowly if sampling gets stuck.
    """
    low, high = 0.10, 0.35
    chosen: list[np.ndarray] = []
    attempts = 0
    while len(chosen) < count:
        candidate = rng.standard_normal(dim)
        if chosen:
            # bias the proposal towards the running mean direction
            candidate = candidate + 0.6 * np.mean(chosen, axis=0)
        candidate /= np.linalg.norm(candidate)
        attempts += 1
        if attempts > 2000:
            low, high = max(0.0, low - 0.05), min(0.99, high + 0.05)
            attempts = 0
        if all(low < candidate @ other < high for other in chosen):
            chosen.append(candidate)
    return np.vstack(chosen)


def gen_analogy_space(spec: SynthSpec) -> tuple[Embedding, AnalogyCategory]:
    """A synthetic space plus its analogy category.

    With ``noise_sigma == 0`` every pair offset equals ``0.5 * e1`` exactly
    and (for ``dim >= 5``) every solver completes every question correctly.
    Noise perturbs the second-position vectors only.
    """
    rng = np.random.default_rng(spec.seed)
    d = spec.dim
    filler_dims = 2 if d >= 5 else 0
    pair_dims = d - 1 - filler_dims  # coordinates 1..pair_dims hold the spread
    if pair_dims < 1:
        pair_dims = d - 1
        filler_dims = 0
    slice_radius = np.sqrt(1.0 - (OFFSET_LENGTH / 2.0) ** 2)
    spread = _spread_directions(rng, spec.n_pairs, pair_dims)
    first = np.zeros((spec.n_pairs, d))
    first[:, 0] = -OFFSET_LENGTH / 2.0
    first[:, 1 : 1 + pair_dims] = slice_radius * spread
    offset = np.zeros(d)
    offset[0] = OFFSET_LENGTH
    second = first + offset
    if spec.noise_sigma > 0.0:
        second = second + spec.noise_sigma * rng.standard_normal(second.shape)
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    pairs: list[tuple[str, str]] = []
    for i in range(spec.n_pairs):
        a, b = f"src{i:03d}", f"dst{i:03d}"
        tokens.extend((a, b))
        rows.extend((first[i], second[i]))
        pairs.append((a, b))
    for j in range(spec.n_fillers):
        filler = np.zeros(d)
        if filler_dims:
            block = rng.standard_normal(filler_dims)
            filler[d - filler_dims :] = block / np.linalg.norm(block)
        else:
            block = rng.standard_normal(d)
            filler = block / np.linalg.norm(block)
        tokens.append(f"fil{j:03d}")
        rows.append(filler)
    embedding = Embedding(
        language=spec.language,
        dim=d,
        vocab=tuple(tokens),
        matrix=np.vstack(rows),
    )
    category = AnalogyCategory(
        name=spec.category,
        kind="semantic",
        pairs_by_language={spec.language: tuple(pairs)},
    )
    return embedding, category


def apply_affine(
    embedding: Embedding,
    M: np.ndarray,
    b: np.ndarray,
    language: str | None = None,
) -> Embedding:
    """Map every vector through x -> M x + b."""
    M = np.asarray(M, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] != embedding.dim:
        raise ValueError(
            f"map shape {M.shape} incompatible with dim {embedding.dim}"
        )
    if b.shape != (M.shape[0],):
        raise ValueError(f"offset shape {b.shape} incompatible with map {M.shape}")
    return embedding.with_matrix(embedding.matrix @ M.T + b, language=language)


def _rotation_2d(dim: int, angle_radians: float) -> np.ndarray:
    rotation = np.eye(dim)
    c, s = np.cos(angle_radians), np.sin(angle_radians)
    rotation[0, 0] = c
    rotation[0, 1] = -s
    rotation[1, 0] = s
    rotation[1, 1] = c
    return rotation


def apply_distortion(embedding: Embedding, distortion: Distortion) -> Embedding:
    """Warp a space non-affinely; level 0 returns the values unchanged."""
    if distortion.kind == "none" or distortion.level == 0.0:
        return embedding
    matrix = embedding.matrix
    if distortion.kind == "radial":
        scales = 1.0 + distortion.level * np.sum(matrix**2, axis=1)
        return embedding.with_matrix(matrix * scales[:, None])
    angle = np.deg2rad(distortion.level)
    forward = _rotation_2d(embedding.dim, angle)
    backward = _rotation_2d(embedding.dim, -angle)
    positive = matrix[:, 0] >= 0.0
    warped = np.where(
        positive[:, None], matrix @ forward.T, matrix @ backward.T
    )
    return embedding.with_matrix(warped)


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """A uniformly random rotation matrix (QR with positive diagonal)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_affine(
    dim: int, rng: np.random.Generator, bias_scale: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """A random well-conditioned affine map (rotation + scaling + bias)."""
    rotation = random_rotation(dim, rng)
    scales = rng.uniform(0.5, 2.0, size=dim)
    M = rotation * scales
    b = bias_scale * rng.standard_normal(dim)
    return M, b


def pair_offsets(embedding: Embedding, category: AnalogyCategory) -> np.ndarray:
    """Offset (second minus first) of every pair in the embedding's language."""
    pairs = category.pairs(embedding.language)
    return np.array(
        [embedding.vector(b) - embedding.vector(a) for a, b in pairs]
    )


def gen_offset_preserving_pair(
    seed: int, dim: int = 4, n_scales: int = 3
) -> tuple[np.ndarray, np.ndarray]:
    """Two point sets whose equal-offset relations all hold exactly.

    The X side contains integer and rational multiples of the basis
    directions plus their pairwise sums; the Y side is built point by point
    through the rules those relations force (images of sums are sums of
    images, images of scaled points are scaled images) starting from random
    basis images.  No global map is ever applied, yet the construction pins
    the Y side down completely.
    """
    rng = np.random.default_rng(seed)
    basis_images = rng.standard_normal((dim, dim)) + np.eye(dim)
    points: list[np.ndarray] = [np.zeros(dim)]
    images: list[np.ndarray] = [np.zeros(dim)]

    def add(point: np.ndarray, image: np.ndarray) -> int:
        points.append(point)
        images.append(image)
        return len(points) - 1

    axis_entries: list[list[tuple[int, int]]] = []
    for axis in range(dim):
        unit = np.zeros(dim)
        unit[axis] = 1.0
        entries = []
        for m in range(1, n_scales + 1):
            idx = add(m * unit, m * basis_images[axis])
            entries.append((m, idx))
        for n in (2, 3):
            add(unit / n, basis_images[axis] / n)
        add(-unit, -basis_images[axis])
        axis_entries.append(entries)
    for axis_a in range(dim):
        for axis_b in range(axis_a + 1, dim):
            _, ia = axis_entries[axis_a][0]
            _, ib = axis_entries[axis_b][0]
            add(points[ia] + points[ib], images[ia] + images[ib])
            add(points[ia] - points[ib], images[ia] - images[ib])
    return np.vstack(points), np.vstack(images)


@dataclass(frozen=True)
class SweepRow:
    """One sweep point: the distortion level and both indicators."""

    level: float
    s_lmp: float
    lrcos_x: float
    lrcos_y: float
    s_pae: float
    seed: int


def _derived_seed(base_seed: int, index: int) -> int:
    # documented derivation: PCG64 SeedSequence over (base seed, point index)
    return int(np.random.SeedSequence([base_seed, index]).generate_state(1)[0])


def build_sweep_grid(
    base: SynthSpec, kind: str, levels: Sequence[float]
) -> list[SynthSpec]:
    """One spec per level; each point gets a seed derived from (base, index)."""
    if kind not in ("radial", "split_linear"):
        raise ValueError(f"sweep kind must be 'radial' or 'split_linear', got {kind!r}")
    grid = []
    for index, level in enumerate(levels):
        grid.append(
            replace(
                base,
                distortion=Distortion(kind, float(level)),
                seed=_derived_seed(base.seed, index),
            )
        )
    return grid


def evaluate_point(
    spec: SynthSpec,
    solver: str = "lrcos",
    lrcos_config: LRCosConfig | None = None,
    fit: str = "gd",
    gd_config: GDConfig = GDConfig(),
) -> SweepRow:
    """Indicators for one synthetic point.

    The clean space is warped by the configured distortion and then rotated
    into a second language (rotations keep every solver's answers
    identical), so any indicator drop is attributable to the distortion
    level alone.
    """
    config = lrcos_config if lrcos_config is not None else LRCosConfig(seed=spec.seed)
    clean_spec = replace(spec, distortion=Distortion.none())
    emb_x, category = gen_analogy_space(clean_spec)
    rng = np.random.default_rng(_derived_seed(spec.seed, 0x0A11))
    rotation = random_rotation(spec.dim, rng)
    # Warp first (in the frame whose first axis separates the two word
    # groups, so the split warp actually cuts the cloud), then rotate into
    # the second language; the rotation alone changes no solver answer.
    emb_y = apply_distortion(emb_x, spec.distortion)
    emb_y = apply_affine(emb_y, rotation, np.zeros(spec.dim), language="xb")
    both = AnalogyCategory(
        name=category.name,
        kind=category.kind,
        pairs_by_language={
            emb_x.language: category.pairs(emb_x.language),
            emb_y.language: category.pairs(emb_x.language),
        },
    )
    result_x = category_accuracy(emb_x, both, solver, config)
    result_y = category_accuracy(emb_y, both, solver, config)
    if result_x.accuracy >= result_y.accuracy:
        src_emb, dst_emb = emb_x, emb_y
        lr_x, lr_y = result_x.accuracy, result_y.accuracy
    else:
        src_emb, dst_emb = emb_y, emb_x
        lr_x, lr_y = result_y.accuracy, result_x.accuracy
    dictionary = category_dictionary(both, src_emb.language, dst_emb.language)
    pair = build_aligned(src_emb, dst_emb, dictionary)
    if fit == "closed":
        fitted = fit_linear_closed(pair)
    else:
        fitted = fit_linear_gd(pair, gd_config)
    return SweepRow(
        level=spec.distortion.level,
        s_lmp=min(fitted.s_lmp, 0.0),
        lrcos_x=lr_x,
        lrcos_y=lr_y,
        s_pae=s_pae(lr_x, lr_y),
        seed=spec.seed,
    )


def theorem_sweep(
    specs: Sequence[SynthSpec],
    solver: str = "lrcos",
    lrcos_config: LRCosConfig | None = None,
    fit: str = "gd",
    gd_config: GDConfig = GDConfig(),
) -> list[SweepRow]:
    """Indicators across a distortion grid (at least 10 points)."""
    if len(specs) < 10:
        raise ValueError(f"need at least 10 grid points, got {len(specs)}")
    return [
        evaluate_point(spec, solver=solver, lrcos_config=lrcos_config, fit=fit, gd_config=gd_config)
        for spec in specs
    ]


def sweep_correlation(rows: Sequence[SweepRow]) -> tuple[float, float]:
    """Spearman correlation between the two indicators over a sweep."""
    return spearman_rho([r.s_lmp for r in rows], [r.s_pae for r in rows])


def shuffled_control(rows: Sequence[SweepRow], seed: int) -> tuple[float, float]:
    """Same correlation after permuting one column; should be near zero."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    shuffled = rng.permutation([r.s_pae for r in rows])
    return spearman_rho([r.s_lmp for r in rows], shuffled)
