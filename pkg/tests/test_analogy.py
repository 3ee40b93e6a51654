import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anlgmap import (
    AnalogyCategory,
    AnalogyQuestion,
    LRCosConfig,
    OutOfVocabularyError,
    category_accuracy,
    generate_questions,
    read_category_file,
    read_corpus,
    solve_3cosadd,
    solve_3cosmul,
    solve_lrcos,
    solve_pairdistance,
    train_membership_classifier,
    write_category_file,
    write_corpus,
)
from anlgmap.analogy import _class_indices
from anlgmap.synthetic import SynthSpec, gen_analogy_space

from conftest import make_category, make_embedding


def distinct_category(t, language="xx"):
    return make_category(
        [(f"a{i}", f"b{i}") for i in range(t)], language=language
    )


class TestGenerateQuestions:
    @pytest.mark.parametrize("t,expected", [(2, 8), (5, 80), (30, 3480)])
    def test_counts(self, t, expected):
        questions = generate_questions(distinct_category(t), "xx")
        assert len(questions) == expected
        assert len(set(questions)) == expected

    def test_two_pair_orientations_exact(self):
        questions = generate_questions(distinct_category(2), "xx")
        got = {(q.a, q.b, q.c, q.gold) for q in questions}
        expected = {
            ("a0", "b0", "a1", "b1"),
            ("b0", "a0", "b1", "a1"),
            ("a1", "a0", "b1", "b0"),
            ("b1", "b0", "a1", "a0"),
            ("a0", "a1", "b0", "b1"),
            ("b0", "b1", "a0", "a1"),
            ("a1", "b1", "a0", "b0"),
            ("b1", "a1", "b0", "a0"),
        }
        assert got == expected

    def test_gold_side_marks_answer_position(self):
        questions = generate_questions(distinct_category(3), "xx")
        for q in questions:
            assert q.gold_side == (1 if q.gold.startswith("b") else 0)

    def test_answers_follow_the_pair_offset(self):
        questions = generate_questions(distinct_category(4), "xx")
        for q in questions:
            # a - b = c - gold must hold index-wise for distinct-word pairs
            side = {"a": 0, "b": 1}
            assert side[q.a[0]] - side[q.b[0]] == side[q.c[0]] - side[q.gold[0]]
            assert q.a[1:] == q.b[1:] or q.a[1:] == q.c[1:]

    def test_colliding_words_drop_questions(self):
        category = make_category([("x", "x"), ("a1", "b1"), ("a2", "b2")])
        questions = generate_questions(category, "xx")
        for q in questions:
            assert "x" not in (q.a, q.b, q.c, q.gold)
        assert len(questions) == 8  # only the clean pair combination remains

    def test_fewer_than_two_pairs_rejected(self):
        category = make_category([("a0", "b0")])
        with pytest.raises(ValueError, match="at least 2"):
            generate_questions(category, "xx")

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=2, max_value=12))
    def test_count_formula_property(self, t):
        questions = generate_questions(distinct_category(t), "xx")
        assert len(questions) == 8 * math.comb(t, 2)


def brute_force_3cosadd(emb, question):
    a, b, c = emb.vector(question.a), emb.vector(question.b), emb.vector(question.c)
    target = b - a + c
    best, best_score = None, -np.inf
    for idx, token in enumerate(emb.vocab):
        if token in (question.a, question.b, question.c):
            continue
        w = emb.matrix[idx]
        denom = np.linalg.norm(w) * np.linalg.norm(target)
        score = float(w @ target) / denom if denom else 0.0
        if score > best_score:
            best, best_score = token, score
    return best


def brute_force_3cosmul(emb, question, epsilon=1e-3):
    a, b, c = emb.vector(question.a), emb.vector(question.b), emb.vector(question.c)
    best, best_score = None, -np.inf
    for idx, token in enumerate(emb.vocab):
        if token in (question.a, question.b, question.c):
            continue
        w = emb.matrix[idx]
        cos01 = lambda u, v: (float(u @ v) + 1.0) / 2.0
        score = cos01(w, b) * cos01(w, c) / (cos01(w, a) + epsilon)
        if score > best_score:
            best, best_score = token, score
    return best


def brute_force_pairdistance(emb, question):
    a, b, c = emb.vector(question.a), emb.vector(question.b), emb.vector(question.c)
    reference = b - a
    best, best_score = None, -np.inf
    for idx, token in enumerate(emb.vocab):
        if token in (question.a, question.b, question.c):
            continue
        offset = emb.matrix[idx] - c
        norm = np.linalg.norm(offset)
        if norm == 0.0:
            continue
        score = float(offset @ reference) / (norm * np.linalg.norm(reference))
        if score > best_score:
            best, best_score = token, score
    return best


def random_unit_embedding(seed, n=20, d=6):
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((n, d))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    return make_embedding(matrix, [f"w{i}" for i in range(n)])


def random_questions(seed, emb, count=100):
    rng = np.random.default_rng(seed)
    questions = []
    while len(questions) < count:
        ia, ib, ic, ig = rng.choice(len(emb), size=4, replace=False)
        questions.append(
            AnalogyQuestion(
                a=emb.vocab[ia], b=emb.vocab[ib], c=emb.vocab[ic],
                gold=emb.vocab[ig], category="CAT",
            )
        )
    return questions


class TestOffsetSolvers:
    def test_3cosadd_exact_offset_space(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=2, dim=6, seed=1))
        unit = emb.unit_normalized()
        for q in generate_questions(cat, "xa"):
            assert solve_3cosadd(unit, q) == q.gold

    def test_3cosadd_oov_raises_skip_signal(self, tiny_embedding):
        q = AnalogyQuestion("alpha", "beta", "missing", "delta", "CAT")
        with pytest.raises(OutOfVocabularyError):
            solve_3cosadd(tiny_embedding, q)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_3cosadd_matches_brute_force(self, seed):
        emb = random_unit_embedding(seed)
        for q in random_questions(seed + 100, emb):
            assert solve_3cosadd(emb, q) == brute_force_3cosadd(emb, q)

    def test_3cosmul_exact_offset_space(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=2, dim=6, seed=2))
        unit = emb.unit_normalized()
        for q in generate_questions(cat, "xa"):
            assert solve_3cosmul(unit, q) == q.gold

    def test_3cosmul_epsilon_guards_antipodal_candidate(self):
        matrix = np.array(
            [[1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [-1.0, 0.0]]
        )
        emb = make_embedding(matrix, ["a", "b", "c", "anti"])
        q = AnalogyQuestion("a", "b", "c", "anti", "CAT")
        # the only candidate has cos(w, a) = -1; the score must stay finite
        assert solve_3cosmul(emb, q) == "anti"

    @pytest.mark.parametrize("seed", [3, 4, 5])
    def test_3cosmul_matches_brute_force(self, seed):
        emb = random_unit_embedding(seed)
        for q in random_questions(seed + 200, emb):
            assert solve_3cosmul(emb, q) == brute_force_3cosmul(emb, q)

    def test_pairdistance_exact_offset_space(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=2, dim=6, seed=3))
        unit = emb.unit_normalized()
        for q in generate_questions(cat, "xa"):
            assert solve_pairdistance(unit, q) == q.gold

    def test_pairdistance_degenerate_question_rejected(self):
        matrix = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        emb = make_embedding(matrix, ["a", "b", "c", "d"])
        q = AnalogyQuestion("a", "b", "c", "d", "CAT")
        with pytest.raises(ValueError, match="degenerate"):
            solve_pairdistance(emb, q)

    @pytest.mark.parametrize("seed", [6, 7, 8])
    def test_pairdistance_matches_brute_force(self, seed):
        emb = random_unit_embedding(seed)
        for q in random_questions(seed + 300, emb):
            assert solve_pairdistance(emb, q) == brute_force_pairdistance(emb, q)

    def test_candidate_shortlist_restricts_answers(self):
        emb = random_unit_embedding(11)
        q = AnalogyQuestion("w0", "w1", "w2", "w3", "CAT")
        shortlist = ["w5", "w9"]
        assert solve_3cosadd(emb, q, candidates=shortlist) in shortlist


class TestLRCos:
    def test_separable_toy_space_selects_gold(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=2, dim=6, seed=4))
        unit = emb.unit_normalized()
        for q in generate_questions(cat, "xa"):
            assert solve_lrcos(unit, cat, q, LRCosConfig(seed=4)) == q.gold

    def test_matches_exhaustive_scoring_oracle(self):
        # 30-word space: 5 pairs + 20 fillers
        spec = SynthSpec(n_pairs=5, dim=6, n_fillers=20, seed=7)
        emb, cat = gen_analogy_space(spec)
        unit = emb.unit_normalized()
        config = LRCosConfig(seed=7)
        for q in generate_questions(cat, "xa"):
            predicted = solve_lrcos(unit, cat, q, config)
            # oracle: rebuild the training sets per the documented policy,
            # train with the public trainer, then scan every candidate
            class_idx = _class_indices(unit, cat, q.gold_side)
            gold_idx = unit.index(q.gold)
            positives = [i for i in class_idx if i != gold_idx]
            pool = np.setdiff1d(np.arange(len(unit)), np.asarray(class_idx))
            rng = np.random.default_rng(config.seed)
            negatives = rng.choice(
                pool, size=min(10 * len(positives), pool.size), replace=False
            )
            clf = train_membership_classifier(unit.matrix, positives, negatives, config)
            probs = clf.probabilities(unit.matrix)
            best, best_score = None, -np.inf
            for idx, token in enumerate(unit.vocab):
                if token in (q.a, q.b, q.c):
                    continue
                score = probs[idx] * float(unit.matrix[idx] @ unit.matrix[unit.index(q.c)])
                if score > best_score:
                    best, best_score = token, score
            assert predicted == best

    def test_too_small_class_rejected(self):
        matrix = np.eye(4)
        emb = make_embedding(matrix, ["a0", "b0", "x", "y"])
        cat = make_category([("a0", "b0"), ("a1", "b1")])  # b1 out of vocabulary
        q = AnalogyQuestion("a0", "b0", "x", "y", "CAT", gold_side=1)
        with pytest.raises(ValueError, match="fewer than 2"):
            solve_lrcos(emb, cat, q, LRCosConfig())

    def test_include_all_positives_flag(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=3, dim=6, seed=5))
        unit = emb.unit_normalized()
        q = generate_questions(cat, "xa")[0]
        with_loo = solve_lrcos(unit, cat, q, LRCosConfig(seed=5, leave_one_out=True))
        without = solve_lrcos(unit, cat, q, LRCosConfig(seed=5, leave_one_out=False))
        assert with_loo == q.gold and without == q.gold


class TestCategoryAccuracy:
    def test_exact_space_all_solvers_perfect(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=2, dim=6, seed=6))
        for solver in ("3cosadd", "3cosmul", "pairdist", "lrcos"):
            result = category_accuracy(emb, cat, solver, LRCosConfig(seed=6))
            assert result.accuracy == 1.0
            assert result.answered == 8
            assert result.skipped_oov == 0

    def test_random_gold_vectors_score_poorly(self):
        rng = np.random.default_rng(9)
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=6, dim=6, seed=9))
        # re-point every answer word at a random direction
        matrix = np.array(emb.matrix)
        for i, (_, b_tok) in enumerate(cat.pairs("xa")):
            vec = rng.standard_normal(emb.dim)
            matrix[emb.index(b_tok)] = vec / np.linalg.norm(vec)
        broken = emb.with_matrix(matrix)
        result = category_accuracy(broken, cat, "3cosadd")
        assert result.accuracy < 0.2

    def test_oov_questions_skipped_not_wrong(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=3, dim=6, seed=10))
        pairs = list(cat.pairs("xa")) + [("ghost", "phantom")]
        bigger = make_category(pairs, language="xa", name=cat.name)
        result = category_accuracy(emb, bigger, "3cosadd")
        generated = len(generate_questions(bigger, "xa"))
        assert result.answered + result.skipped_oov == generated
        assert result.skipped_oov == generated - 3 * 8
        assert result.accuracy == 1.0

    def test_all_oov_rejected(self):
        emb, _ = gen_analogy_space(SynthSpec(n_pairs=2, dim=6, seed=11))
        cat = make_category([("nope1", "nope2"), ("nope3", "nope4")], language="xa")
        with pytest.raises(ValueError, match="no answerable"):
            category_accuracy(emb, cat, "3cosadd")

    def test_unknown_solver_rejected(self, tiny_embedding):
        cat = make_category([("alpha", "beta"), ("gamma", "delta")])
        with pytest.raises(ValueError, match="unknown solver"):
            category_accuracy(tiny_embedding, cat, "best-solver")

    def test_uniform_scaling_invariance(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=4, dim=6, seed=12))
        scaled = emb.with_matrix(emb.matrix * 3.7)
        config = LRCosConfig(seed=12)
        for solver in ("3cosadd", "3cosmul", "pairdist", "lrcos"):
            base = category_accuracy(emb, cat, solver, config, keep_per_question=True)
            other = category_accuracy(scaled, cat, solver, config, keep_per_question=True)
            assert [p for _, p, _ in base.per_question] == [
                p for _, p, _ in other.per_question
            ]

    def test_deterministic_given_seed(self):
        emb, cat = gen_analogy_space(SynthSpec(n_pairs=4, dim=6, seed=13))
        config = LRCosConfig(seed=13)
        first = category_accuracy(emb, cat, "lrcos", config, keep_per_question=True)
        second = category_accuracy(emb, cat, "lrcos", config, keep_per_question=True)
        assert first == second


class TestCorpusFiles:
    def test_roundtrip(self, tmp_path):
        category = AnalogyCategory(
            name="CAP",
            kind="semantic",
            pairs_by_language={
                "en": (("paris", "france"), ("rome", "italy")),
                "de": (("paris", "frankreich"), ("rom", "italien")),
            },
        )
        path = tmp_path / "CAP.tsv"
        write_category_file(category, path)
        loaded = read_category_file(path)
        assert loaded == category

    def test_file_layout(self, tmp_path):
        category = AnalogyCategory(
            name="GNDR",
            kind="syntactic",
            pairs_by_language={"en": (("king", "queen"), ("man", "woman"))},
        )
        path = tmp_path / "GNDR.tsv"
        write_category_file(category, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "#category GNDR syntactic"
        assert lines[1] == "en"
        assert lines[2] == "king/queen"

    def test_corpus_directory_roundtrip(self, tmp_path):
        cats = [
            make_category([("a0", "b0"), ("a1", "b1")], name="ONE"),
            make_category([("c0", "d0"), ("c1", "d1")], name="TWO", kind="syntactic"),
        ]
        write_corpus(cats, tmp_path / "corpus")
        loaded = read_corpus(tmp_path / "corpus")
        assert sorted(loaded) == ["ONE", "TWO"]
        assert loaded["TWO"].kind == "syntactic"

    def test_slash_in_word_rejected_on_write(self, tmp_path):
        category = make_category([("a/b", "c"), ("d", "e")])
        with pytest.raises(ValueError, match="cannot be written"):
            write_category_file(category, tmp_path / "bad.tsv")

    def test_malformed_cell_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("#category X semantic\nen\nnoslash\n", encoding="utf-8")
        with pytest.raises(ValueError, match="malformed cell"):
            read_category_file(path)

    def test_misaligned_counts_rejected(self):
        with pytest.raises(ValueError, match="differ across languages"):
            AnalogyCategory(
                name="X",
                kind="semantic",
                pairs_by_language={"en": (("a", "b"),), "de": ()},
            )
