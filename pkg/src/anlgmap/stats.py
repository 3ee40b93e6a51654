"""Indicator records, correlation statistics, and grid assembly.

One indicator record is a (language pair, category, embedding series) cell:
the linearity score of the best linear map between the two spaces, the two
monolingual analogy accuracies, and their geometric mean.  Correlations over
grids use Spearman's rank-order and Pearson product-moment coefficients with
two-tailed p-values; a two-group one-way ANOVA compares the semantic and
syntactic splits of the per-group coefficients.
"""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from itertools import combinations
from math import sqrt
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as sps

from .analogy import AnalogyCategory, LRCosConfig, category_accuracy
from .embeddings import Embedding
from .mapping import GDConfig, build_aligned, category_dictionary, fit_linear_closed, fit_linear_gd

logger = logging.getLogger(__name__)

__all__ = [
    "IndicatorRecord",
    "CorrelationReport",
    "s_pae",
    "spearman_rho",
    "pearson_r",
    "anova_two_treatment",
    "build_indicator_grid",
    "correlate_records",
    "write_grid_csv",
    "read_grid_csv",
    "GRID_CSV_FIELDS",
]


def s_pae(lrcos_x: float, lrcos_y: float) -> float:
    """Geometric mean of the two monolingual analogy accuracies."""
    for value in (lrcos_x, lrcos_y):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"accuracy {value} outside [0, 1]")
    return sqrt(lrcos_x * lrcos_y)


def _as_series(xs: Sequence[float], ys: Sequence[float], minimum: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ValueError("inputs must be 1-D series of equal length")
    if x.size < minimum:
        raise ValueError(f"need at least {minimum} observations, got {x.size}")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ValueError("correlation is undefined for a constant series")
    return x, y


def _permutation_p(
    statistic, x: np.ndarray, y: np.ndarray, observed: float, n_permutations: int, seed: int
) -> float:
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_permutations):
        value = statistic(x, rng.permutation(y))
        if abs(value) >= abs(observed) - 1e-12:
            hits += 1
    return (hits + 1) / (n_permutations + 1)


def spearman_rho(
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    n_permutations: int | None = None,
    seed: int = 0,
) -> tuple[float, float]:
    """Rank-order correlation with average-rank ties.

    The default p-value is two-tailed from the t statistic with n - 2
    degrees of freedom; pass ``n_permutations`` for a permutation p-value
    instead.
    """
    x, y = _as_series(xs, ys, minimum=3)
    rho, p = sps.spearmanr(x, y)
    rho = float(rho)
    if n_permutations is not None:
        p = _permutation_p(
            lambda a, b: sps.spearmanr(a, b)[0], x, y, rho, n_permutations, seed
        )
    return rho, float(p)


def pearson_r(
    xs: Sequence[float],
    ys: Sequence[float],
    *,
    n_permutations: int | None = None,
    seed: int = 0,
) -> tuple[float, float]:
    """Product-moment correlation with a two-tailed t-based p-value."""
    x, y = _as_series(xs, ys, minimum=3)
    r, p = sps.pearsonr(x, y)
    r = float(r)
    if n_permutations is not None:
        p = _permutation_p(
            lambda a, b: sps.pearsonr(a, b)[0], x, y, r, n_permutations, seed
        )
    return r, float(p)


def anova_two_treatment(
    group_a: Sequence[float], group_b: Sequence[float]
) -> tuple[float, float]:
    """One-way ANOVA with two groups: F(1, n_a + n_b - 2) and its p-value."""
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1 or a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least 2 observations")
    within = np.sum((a - a.mean()) ** 2) + np.sum((b - b.mean()) ** 2)
    if within == 0.0:
        raise ValueError("ANOVA is undefined with zero within-group variance")
    f, p = sps.f_oneway(a, b)
    return float(f), float(p)


@dataclass(frozen=True)
class IndicatorRecord:
    """One (language pair, category, series) cell of the indicator grid.

    Languages are ordered so ``lrcos_x >= lrcos_y``: the space that encodes
    the analogy better is always the mapping source.
    """

    lang_x: str
    lang_y: str
    category: str
    series: str
    s_lmp: float
    lrcos_x: float
    lrcos_y: float
    s_pae: float
    kind: str = "semantic"
    aligned_rows: int = 0
    answered_x: int = 0
    skipped_x: int = 0
    answered_y: int = 0
    skipped_y: int = 0

    def __post_init__(self) -> None:
        if self.s_lmp > 0.0:
            raise ValueError(f"s_lmp must be <= 0, got {self.s_lmp}")
        for value in (self.lrcos_x, self.lrcos_y):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"accuracy {value} outside [0, 1]")
        if self.lrcos_x < self.lrcos_y:
            raise ValueError("records must be ordered so lrcos_x >= lrcos_y")
        if abs(self.s_pae - sqrt(self.lrcos_x * self.lrcos_y)) > 1e-12:
            raise ValueError("s_pae does not match the geometric mean of the accuracies")


@dataclass(frozen=True)
class CorrelationReport:
    group_key: tuple[str, ...]
    n: int
    spearman_rho: float
    pearson_r: float
    p_spearman: float
    p_pearson: float
    anova_f: float | None = None
    anova_p: float | None = None


def _grid_cell(
    embeddings: Mapping[str, Embedding],
    category: AnalogyCategory,
    lang_a: str,
    lang_b: str,
    series: str,
    solver: str,
    lrcos_config: LRCosConfig,
    fit: str,
    gd_config: GDConfig,
) -> IndicatorRecord:
    result_a = category_accuracy(embeddings[lang_a], category, solver, lrcos_config)
    result_b = category_accuracy(embeddings[lang_b], category, solver, lrcos_config)
    # The better-encoding side becomes the mapping source; ties keep the
    # lexicographically smaller language as source for determinism.
    if result_a.accuracy >= result_b.accuracy:
        src, dst, res_src, res_dst = lang_a, lang_b, result_a, result_b
    else:
        src, dst, res_src, res_dst = lang_b, lang_a, result_b, result_a
    dictionary = category_dictionary(category, src, dst)
    pair = build_aligned(embeddings[src], embeddings[dst], dictionary)
    fitter = fit_linear_gd if fit == "gd" else fit_linear_closed
    fitted = fitter(pair) if fit == "closed" else fitter(pair, gd_config)
    return IndicatorRecord(
        lang_x=src,
        lang_y=dst,
        category=category.name,
        series=series,
        s_lmp=min(fitted.s_lmp, 0.0),
        lrcos_x=res_src.accuracy,
        lrcos_y=res_dst.accuracy,
        s_pae=s_pae(res_src.accuracy, res_dst.accuracy),
        kind=category.kind,
        aligned_rows=len(pair),
        answered_x=res_src.answered,
        skipped_x=res_src.skipped_oov,
        answered_y=res_dst.answered,
        skipped_y=res_dst.skipped_oov,
    )


def build_indicator_grid(
    embeddings: Mapping[str, Embedding],
    corpus: Mapping[str, AnalogyCategory],
    series: str,
    solver: str = "lrcos",
    lrcos_config: LRCosConfig = LRCosConfig(),
    fit: str = "gd",
    gd_config: GDConfig = GDConfig(),
    jobs: int | None = None,
) -> list[IndicatorRecord]:
    """One record per unordered language pair per category.

    Cells are independent; ``jobs`` bounds the worker threads used to
    evaluate them.  Output order is deterministic (category, then language
    pair) regardless of parallelism.
    """
    if fit not in ("gd", "closed"):
        raise ValueError(f"fit must be 'gd' or 'closed', got {fit!r}")
    tasks = []
    for name in sorted(corpus):
        category = corpus[name]
        available = [lang for lang in category.languages if lang in embeddings]
        if len(available) < 2:
            logger.warning(
                "category %s: fewer than 2 languages with embeddings, skipped", name
            )
            continue
        for lang_a, lang_b in combinations(sorted(available), 2):
            tasks.append((category, lang_a, lang_b))
    if not tasks:
        raise ValueError("no (language pair, category) cell has embeddings on both sides")

    def run(task):
        category, lang_a, lang_b = task
        try:
            return _grid_cell(
                embeddings, category, lang_a, lang_b, series,
                solver, lrcos_config, fit, gd_config,
            )
        except ValueError as exc:
            raise ValueError(
                f"{lang_a}-{lang_b}/{category.name}: {exc}"
            ) from exc

    if jobs is not None and jobs == 1:
        return [run(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, tasks))


def correlate_records(
    records: Sequence[IndicatorRecord],
    group_by: Sequence[str] = ("series", "category"),
    *,
    n_permutations: int | None = None,
    seed: int = 0,
) -> tuple[list[CorrelationReport], dict | None]:
    """Per-group correlations between s_lmp and s_pae, plus the kind ANOVA.

    Groups with fewer than 3 records are skipped.  The second return value
    compares semantic and syntactic groups' coefficients (None when either
    split is too small).
    """
    valid = {f.name for f in fields(IndicatorRecord)}
    for key in group_by:
        if key not in valid:
            raise ValueError(f"cannot group by unknown field {key!r}")
    groups: dict[tuple[str, ...], list[IndicatorRecord]] = {}
    for record in records:
        key = tuple(str(getattr(record, k)) for k in group_by)
        groups.setdefault(key, []).append(record)
    reports: list[CorrelationReport] = []
    kinds: dict[tuple[str, ...], str] = {}
    for key in sorted(groups):
        members = groups[key]
        if len(members) < 3:
            logger.warning("group %s: fewer than 3 records, skipped", key)
            continue
        xs = [r.s_lmp for r in members]
        ys = [r.s_pae for r in members]
        rho, p_s = spearman_rho(xs, ys, n_permutations=n_permutations, seed=seed)
        r, p_p = pearson_r(xs, ys, n_permutations=n_permutations, seed=seed)
        reports.append(
            CorrelationReport(
                group_key=key,
                n=len(members),
                spearman_rho=rho,
                pearson_r=r,
                p_spearman=p_s,
                p_pearson=p_p,
            )
        )
        group_kinds = {r.kind for r in members}
        kinds[key] = group_kinds.pop() if len(group_kinds) == 1 else "mixed"
    anova = None
    semantic = [r for r in reports if kinds.get(r.group_key) == "semantic"]
    syntactic = [r for r in reports if kinds.get(r.group_key) == "syntactic"]
    if len(semantic) >= 2 and len(syntactic) >= 2:
        try:
            f_s, p_s = anova_two_treatment(
                [r.spearman_rho for r in semantic], [r.spearman_rho for r in syntactic]
            )
            f_p, p_p = anova_two_treatment(
                [r.pearson_r for r in semantic], [r.pearson_r for r in syntactic]
            )
            anova = {
                "spearman": {"f": f_s, "p": p_s},
                "pearson": {"f": f_p, "p": p_p},
            }
        except ValueError as exc:
            logger.warning("kind ANOVA skipped: %s", exc)
    return reports, anova


GRID_CSV_FIELDS = (
    "series",
    "category",
    "kind",
    "lang_x",
    "lang_y",
    "s_lmp",
    "lrcos_x",
    "lrcos_y",
    "s_pae",
    "aligned_rows",
    "answered_x",
    "skipped_x",
    "answered_y",
    "skipped_y",
)


def write_grid_csv(records: Sequence[IndicatorRecord], path: str | Path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(GRID_CSV_FIELDS)
        for record in records:
            writer.writerow(
                [
                    record.series,
                    record.category,
                    record.kind,
                    record.lang_x,
                    record.lang_y,
                    repr(record.s_lmp),
                    repr(record.lrcos_x),
                    repr(record.lrcos_y),
                    repr(record.s_pae),
                    record.aligned_rows,
                    record.answered_x,
                    record.skipped_x,
                    record.answered_y,
                    record.skipped_y,
                ]
            )


def read_grid_csv(path: str | Path) -> list[IndicatorRecord]:
    path = Path(path)
    records: list[IndicatorRecord] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != GRID_CSV_FIELDS:
            raise ValueError(f"{path}: unexpected grid CSV header {reader.fieldnames}")
        for row in reader:
            records.append(
                IndicatorRecord(
                    lang_x=row["lang_x"],
                    lang_y=row["lang_y"],
                    category=row["category"],
                    series=row["series"],
                    s_lmp=float(row["s_lmp"]),
                    lrcos_x=float(row["lrcos_x"]),
                    lrcos_y=float(row["lrcos_y"]),
                    s_pae=float(row["s_pae"]),
                    kind=row["kind"],
                    aligned_rows=int(row["aligned_rows"]),
                    answered_x=int(row["answered_x"]),
                    skipped_x=int(row["skipped_x"]),
                    answered_y=int(row["answered_y"]),
                    skipped_y=int(row["skipped_y"]),
                )
            )
    if not records:
        raise ValueError(f"{path}: empty grid")
    return records
