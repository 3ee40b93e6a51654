import math

import numpy as np
import pytest
from scipy.special import betainc, fdtrc

from anlgmap import (
    AnalogyCategory,
    IndicatorRecord,
    anova_two_treatment,
    apply_affine,
    build_indicator_grid,
    correlate_records,
    gen_analogy_space,
    pearson_r,
    read_grid_csv,
    s_pae,
    spearman_rho,
    write_grid_csv,
)
from anlgmap.synthetic import SynthSpec, random_rotation


# --- independent textbook oracles -----------------------------------------


def average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def pearson_oracle(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    r = cov / math.sqrt(vx * vy)
    df = n - 2
    if abs(r) >= 1.0:
        return r, 0.0
    t2 = r * r * df / (1.0 - r * r)
    p = betainc(0.5 * df, 0.5, df / (df + t2))
    return r, float(p)


def spearman_oracle(xs, ys):
    return pearson_oracle(average_ranks(xs), average_ranks(ys))


def anova_oracle(a, b):
    na, nb = len(a), len(b)
    mean_a = sum(a) / na
    mean_b = sum(b) / nb
    grand = (sum(a) + sum(b)) / (na + nb)
    ssb = na * (mean_a - grand) ** 2 + nb * (mean_b - grand) ** 2
    ssw = sum((x - mean_a) ** 2 for x in a) + sum((x - mean_b) ** 2 for x in b)
    df_within = na + nb - 2
    f = (ssb / 1.0) / (ssw / df_within)
    return f, float(fdtrc(1.0, df_within, f))


class TestSPae:
    def test_perfect(self):
        assert s_pae(1.0, 1.0) == 1.0

    def test_zero_annihilates(self):
        assert s_pae(0.5, 0.0) == 0.0

    def test_geometric_mean_value(self):
        assert abs(s_pae(0.94, 0.68) - 0.7994998436522673) < 1e-15

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            s_pae(1.2, 0.5)
        with pytest.raises(ValueError):
            s_pae(0.5, -0.1)


class TestSpearman:
    def test_identical_orderings(self):
        rho, _ = spearman_rho([1, 2, 3, 4], [10, 20, 30, 40])
        assert rho == 1.0

    def test_reversed_orderings(self):
        rho, _ = spearman_rho([1, 2, 3, 4], [4, 3, 2, 1])
        assert rho == -1.0

    def test_matches_rank_then_pearson_oracle(self):
        rng = np.random.default_rng(15)
        for _ in range(20):
            xs = list(rng.standard_normal(15))
            ys = list(rng.standard_normal(15))
            rho, p = spearman_rho(xs, ys)
            rho_o, p_o = spearman_oracle(xs, ys)
            assert abs(rho - rho_o) < 1e-9
            assert abs(p - p_o) < 1e-9

    def test_ties_use_average_ranks(self):
        xs = [1.0, 1.0, 2.0, 3.0]
        ys = [5.0, 6.0, 7.0, 8.0]
        rho, _ = spearman_rho(xs, ys)
        rho_o, _ = spearman_oracle(xs, ys)
        assert abs(rho - rho_o) < 1e-12

    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            spearman_rho([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="at least 3"):
            spearman_rho([1.0, 2.0], [2.0, 1.0])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(16)
        xs = list(rng.uniform(-3, 3, size=20))
        ys = list(rng.uniform(-3, 3, size=20))
        base, _ = spearman_rho(xs, ys)
        for transform in (np.exp, lambda v: np.power(v, 3)):
            rho_x, _ = spearman_rho(list(transform(np.array(xs))), ys)
            rho_y, _ = spearman_rho(xs, list(transform(np.array(ys))))
            assert abs(rho_x - base) < 1e-9
            assert abs(rho_y - base) < 1e-9

    def test_permutation_p_deterministic_and_sane(self):
        rng = np.random.default_rng(17)
        xs = list(rng.standard_normal(12))
        ys = [x + 0.1 * e for x, e in zip(xs, rng.standard_normal(12))]
        _, p1 = spearman_rho(xs, ys, n_permutations=500, seed=5)
        _, p2 = spearman_rho(xs, ys, n_permutations=500, seed=5)
        assert p1 == p2
        assert p1 < 0.05


class TestPearson:
    def test_exact_affine(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        r, _ = pearson_r(xs, [2 * x + 3 for x in xs])
        assert abs(r - 1.0) < 1e-12

    def test_exact_negation(self):
        xs = [1.0, 2.0, 3.0]
        r, _ = pearson_r(xs, [-x for x in xs])
        assert abs(r + 1.0) < 1e-12

    def test_matches_covariance_oracle(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            xs = list(rng.standard_normal(15))
            ys = list(rng.standard_normal(15))
            r, p = pearson_r(xs, ys)
            r_o, p_o = pearson_oracle(xs, ys)
            assert abs(r - r_o) < 1e-9
            assert abs(p - p_o) < 1e-9

    def test_affine_invariance(self):
        rng = np.random.default_rng(19)
        xs = list(rng.standard_normal(20))
        ys = list(rng.standard_normal(20))
        base, _ = pearson_r(xs, ys)
        r1, _ = pearson_r([5.0 * x + 2.0 for x in xs], ys)
        r2, _ = pearson_r(xs, [0.3 * y - 7.0 for y in ys])
        assert abs(r1 - base) < 1e-9
        assert abs(r2 - base) < 1e-9


class TestAnova:
    def test_identical_groups(self):
        f, p = anova_two_treatment([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert f == 0.0
        assert p == 1.0

    def test_extreme_separation(self):
        rng = np.random.default_rng(20)
        a = [0.0 + 1e-4 * e for e in rng.standard_normal(3)]
        b = [10.0 + 1e-4 * e for e in rng.standard_normal(3)]
        _, p = anova_two_treatment(a, b)
        assert p < 1e-6

    def test_matches_textbook_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            a = list(rng.standard_normal(rng.integers(3, 10)))
            b = list(rng.standard_normal(rng.integers(3, 10)) + 0.5)
            f, p = anova_two_treatment(a, b)
            f_o, p_o = anova_oracle(a, b)
            assert abs(f - f_o) < 1e-9
            assert abs(p - p_o) < 1e-9

    def test_degenerate_variance_rejected(self):
        with pytest.raises(ValueError, match="variance"):
            anova_two_treatment([1.0, 1.0], [2.0, 2.0])

    def test_small_group_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            anova_two_treatment([1.0], [2.0, 3.0])


def record(**kwargs):
    base = dict(
        lang_x="en", lang_y="de", category="CAP", series="wiki",
        s_lmp=-0.2, lrcos_x=0.9, lrcos_y=0.4, s_pae=s_pae(0.9, 0.4),
        kind="semantic",
    )
    base.update(kwargs)
    return IndicatorRecord(**base)


class TestIndicatorRecord:
    def test_orders_accuracies(self):
        with pytest.raises(ValueError, match="ordered"):
            record(lrcos_x=0.3, lrcos_y=0.7, s_pae=s_pae(0.3, 0.7))

    def test_geometric_mean_enforced(self):
        with pytest.raises(ValueError, match="geometric mean"):
            record(s_pae=0.99)

    def test_positive_linearity_score_rejected(self):
        with pytest.raises(ValueError, match="<= 0"):
            record(s_lmp=0.5)


def multilang_setup(n_langs, n_categories=1, seed=0):
    """One synthetic space shared (rotated) across several languages."""
    emb, category = gen_analogy_space(SynthSpec(n_pairs=4, dim=6, seed=seed))
    langs = [f"l{i}" for i in range(n_langs)]
    rng = np.random.default_rng(seed + 1)
    embeddings = {}
    for i, lang in enumerate(langs):
        rotation = random_rotation(6, rng) if i else np.eye(6)
        embeddings[lang] = apply_affine(emb, rotation, np.zeros(6), language=lang)
    pairs = category.pairs(emb.language)
    corpus = {}
    for c in range(n_categories):
        name = f"CAT{c}"
        kind = "semantic" if c % 2 == 0 else "syntactic"
        corpus[name] = AnalogyCategory(
            name=name, kind=kind, pairs_by_language={lang: pairs for lang in langs}
        )
    return embeddings, corpus


class TestIndicatorGrid:
    @pytest.mark.parametrize("n_langs,expected", [(6, 15), (7, 21)])
    def test_record_count_per_language_pairs(self, n_langs, expected):
        embeddings, corpus = multilang_setup(n_langs)
        records = build_indicator_grid(
            embeddings, corpus, series="synthetic", solver="3cosadd", fit="closed"
        )
        assert len(records) == expected

    def test_three_languages_two_categories(self):
        embeddings, corpus = multilang_setup(3, n_categories=2)
        records = build_indicator_grid(
            embeddings, corpus, series="synthetic", solver="3cosadd", fit="closed"
        )
        assert len(records) == 6

    def test_records_respect_ordering_convention(self):
        embeddings, corpus = multilang_setup(4)
        records = build_indicator_grid(
            embeddings, corpus, series="s", solver="3cosadd", fit="closed"
        )
        for r in records:
            assert r.lrcos_x >= r.lrcos_y
            assert abs(r.s_pae - math.sqrt(r.lrcos_x * r.lrcos_y)) < 1e-12
            assert r.s_lmp <= 0.0
            assert r.aligned_rows == 8

    def test_parallel_equals_serial(self):
        embeddings, corpus = multilang_setup(4, n_categories=2)
        serial = build_indicator_grid(
            embeddings, corpus, series="s", solver="3cosadd", fit="closed", jobs=1
        )
        parallel = build_indicator_grid(
            embeddings, corpus, series="s", solver="3cosadd", fit="closed", jobs=4
        )
        assert serial == parallel

    def test_no_shared_language_rejected(self):
        embeddings, corpus = multilang_setup(3)
        lonely = {"l0": embeddings["l0"]}
        with pytest.raises(ValueError, match="no .* cell"):
            build_indicator_grid(lonely, corpus, series="s", solver="3cosadd")


class TestGridCsv:
    def test_roundtrip_and_byte_determinism(self, tmp_path):
        embeddings, corpus = multilang_setup(3, n_categories=2)
        records = build_indicator_grid(
            embeddings, corpus, series="synthetic", solver="3cosadd", fit="closed"
        )
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_grid_csv(records, p1)
        write_grid_csv(records, p2)
        assert p1.read_bytes() == p2.read_bytes()
        loaded = read_grid_csv(p1)
        assert loaded == records

    def test_unexpected_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
        with pytest.raises(ValueError, match="header"):
            read_grid_csv(path)


class TestCorrelateRecords:
    def make_grid(self, rng, series, category, kind, n, slope):
        records = []
        for _ in range(n):
            lrx = float(rng.uniform(0.4, 1.0))
            lry = float(rng.uniform(0.1, lrx))
            pae = s_pae(lrx, lry)
            lmp = -max(0.0, 1.0 - slope * pae + 0.05 * rng.standard_normal())
            records.append(
                IndicatorRecord(
                    lang_x="l0", lang_y="l1", category=category, series=series,
                    s_lmp=min(lmp, 0.0), lrcos_x=lrx, lrcos_y=lry, s_pae=pae,
                    kind=kind,
                )
            )
        return records

    def test_groups_and_anova(self):
        rng = np.random.default_rng(33)
        records = []
        for c, kind in (("A", "semantic"), ("B", "semantic"), ("C", "syntactic"), ("D", "syntactic")):
            records += self.make_grid(rng, "wiki", c, kind, 12, slope=0.9)
        reports, anova = correlate_records(records)
        assert len(reports) == 4
        for report in reports:
            assert report.n == 12
            assert report.spearman_rho > 0.5
            assert report.p_spearman < 0.05
        assert anova is not None
        assert set(anova) == {"spearman", "pearson"}
        assert anova["spearman"]["p"] > 0.0

    def test_small_groups_skipped(self):
        rng = np.random.default_rng(34)
        records = self.make_grid(rng, "wiki", "A", "semantic", 2, slope=0.9)
        records += self.make_grid(rng, "wiki", "B", "semantic", 10, slope=0.9)
        reports, _ = correlate_records(records)
        assert [r.group_key for r in reports] == [("wiki", "B")]

    def test_unknown_group_field_rejected(self):
        with pytest.raises(ValueError, match="unknown field"):
            correlate_records([], group_by=("flavour",))

    def test_synthetic_monotone_relation_detected(self):
        # s_lmp constructed as a noisy monotone function of s_pae
        rng = np.random.default_rng(35)
        records = self.make_grid(rng, "wiki", "A", "semantic", 20, slope=1.0)
        reports, _ = correlate_records(records)
        assert reports[0].spearman_rho > 0.0
        assert reports[0].p_spearman < 1e-2
