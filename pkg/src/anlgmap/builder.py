"""Construct fully parallel cross-lingual analogy categories.

Starting from monolingual analogy sets and translation dictionaries, each
source pair is translated (cross-product of the per-word translations) and
kept only when some candidate coincides, order-sensitively, with a pair of
the target-language set.  Repeating the intersection against every further
language leaves rows that are aligned across all of them; categories that
end up below the minimum pair count are dropped and reported.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .analogy import AnalogyCategory, read_category_file
from .mapping import BilingualDictionary

logger = logging.getLogger(__name__)

__all__ = [
    "MonolingualAnalogySet",
    "CategoryTrace",
    "BuildReport",
    "load_monolingual_set",
    "translate_pairs",
    "intersect_bilingual",
    "build_corpus",
]

Pair = tuple[str, str]


@dataclass(frozen=True)
class MonolingualAnalogySet:
    """Analogy pairs of a single language, grouped by category."""

    language: str
    categories: Mapping[str, tuple[Pair, ...]]
    kinds: Mapping[str, str]

    def __post_init__(self) -> None:
        frozen = {
            name: tuple((str(a), str(b)) for a, b in pairs)
            for name, pairs in self.categories.items()
        }
        for name, pairs in frozen.items():
            if len(set(pairs)) != len(pairs):
                raise ValueError(f"category {name!r}: duplicate pair")
        kinds = dict(self.kinds)
        missing = set(frozen) - set(kinds)
        if missing:
            raise ValueError(f"missing kind for categories: {sorted(missing)}")
        object.__setattr__(self, "categories", frozen)
        object.__setattr__(self, "kinds", kinds)


def load_monolingual_set(directory: str | Path, language: str | None = None) -> MonolingualAnalogySet:
    """Read a directory of single-language category files into one set."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"{directory}: not a directory")
    categories: dict[str, tuple[Pair, ...]] = {}
    kinds: dict[str, str] = {}
    seen_language: str | None = language
    for path in sorted(directory.glob("*.tsv")):
        category = read_category_file(path)
        if len(category.languages) != 1:
            raise ValueError(f"{path}: expected a single-language category file")
        lang = category.languages[0]
        if seen_language is None:
            seen_language = lang
        elif lang != seen_language:
            raise ValueError(
                f"{path}: language {lang!r} does not match {seen_language!r}"
            )
        categories[category.name] = category.pairs(lang)
        kinds[category.name] = category.kind
    if not categories:
        raise ValueError(f"{directory}: no category files found")
    assert seen_language is not None
    return MonolingualAnalogySet(language=seen_language, categories=categories, kinds=kinds)


def _is_single_token(word: str) -> bool:
    return bool(word) and not any(ch.isspace() for ch in word)


def translate_pairs(
    pairs: Sequence[Pair], dictionary: BilingualDictionary
) -> list[tuple[Pair, tuple[Pair, ...]]]:
    """Candidate translations of each pair: the per-word cross-product.

    Pairs with an untranslatable word get an empty candidate tuple (that is
    data, not an error).  Multi-word translations are discarded.
    """
    out: list[tuple[Pair, tuple[Pair, ...]]] = []
    for word_a, word_b in pairs:
        first = [t for t in dictionary.translations(word_a) if _is_single_token(t)]
        second = [t for t in dictionary.translations(word_b) if _is_single_token(t)]
        candidates = tuple((ta, tb) for ta in first for tb in second)
        out.append(((word_a, word_b), candidates))
    return out


def _intersect(
    source_pairs: Sequence[Pair],
    target_pairs: Sequence[Pair],
    dictionary: BilingualDictionary,
) -> tuple[list[tuple[Pair, Pair]], int]:
    """Align source pairs to target pairs through coinciding translations.

    Matching is order-sensitive within a pair and one-to-one: each source
    pair takes the first unconsumed target pair (in target-set order) among
    its candidates.  Returns the alignments plus how many source pairs had
    any translation candidate at all.
    """
    translated = translate_pairs(source_pairs, dictionary)
    consumed: set[Pair] = set()
    alignments: list[tuple[Pair, Pair]] = []
    n_translated = 0
    for source_pair, candidates in translated:
        if candidates:
            n_translated += 1
        candidate_set = set(candidates)
        matches = [
            t for t in target_pairs if t in candidate_set and t not in consumed
        ]
        if not matches:
            continue
        if len(matches) > 1:
            logger.info(
                "pair %s matches %d target pairs; keeping the first in target order",
                source_pair,
                len(matches),
            )
        target = matches[0]
        consumed.add(target)
        alignments.append((source_pair, target))
    return alignments, n_translated


def intersect_bilingual(
    src_set: MonolingualAnalogySet,
    tgt_set: MonolingualAnalogySet,
    dictionary: BilingualDictionary,
    category: str,
) -> list[tuple[Pair, Pair]]:
    """Aligned (source pair, target pair) rows for one category."""
    for analogy_set in (src_set, tgt_set):
        if category not in analogy_set.categories:
            raise ValueError(
                f"category {category!r} missing from the {analogy_set.language!r} set"
            )
    if dictionary.source_lang != src_set.language or dictionary.target_lang != tgt_set.language:
        raise ValueError(
            f"dictionary {dictionary.source_lang}-{dictionary.target_lang} does not "
            f"match sets {src_set.language}-{tgt_set.language}"
        )
    alignments, _ = _intersect(
        src_set.categories[category], tgt_set.categories[category], dictionary
    )
    return alignments


@dataclass(frozen=True)
class CategoryTrace:
    """Row counts after each pipeline stage for one category."""

    stages: tuple[tuple[str, int], ...]
    kept: bool

    @property
    def final_count(self) -> int:
        return self.stages[-1][1]


@dataclass(frozen=True)
class BuildReport:
    min_pairs: int
    categories: Mapping[str, CategoryTrace]

    def dropped(self) -> tuple[str, ...]:
        return tuple(name for name, trace in self.categories.items() if not trace.kept)


def build_corpus(
    sets: Sequence[MonolingualAnalogySet],
    dictionaries: Mapping[tuple[str, str], BilingualDictionary],
    min_pairs: int = 30,
) -> tuple[dict[str, AnalogyCategory], BuildReport]:
    """Iterate the bilingual intersection across all languages.

    Languages are processed in the given order, pivoting on the first: every
    further language needs a (pivot, language) dictionary.  The output rows
    are aligned across every language; categories with fewer than
    ``min_pairs`` surviving rows are dropped and recorded in the report.
    """
    if not sets:
        raise ValueError("need at least one monolingual set")
    languages = [s.language for s in sets]
    if len(set(languages)) != len(languages):
        raise ValueError(f"duplicate language in {languages}")
    pivot = sets[0]
    for other in sets[1:]:
        key = (pivot.language, other.language)
        if key not in dictionaries:
            raise ValueError(f"missing dictionary for language pair {key}")
    corpus: dict[str, AnalogyCategory] = {}
    traces: dict[str, CategoryTrace] = {}
    for name in pivot.categories:
        source_pairs = pivot.categories[name]
        stages: list[tuple[str, int]] = [("source", len(source_pairs))]
        rows: list[dict[str, Pair]] = [
            {pivot.language: pair} for pair in source_pairs
        ]
        for other in sets[1:]:
            if name not in other.categories:
                logger.warning(
                    "category %s missing in %s; all rows dropped", name, other.language
                )
                rows = []
                stages.append((f"translated:{other.language}", 0))
                stages.append((f"coincided:{other.language}", 0))
                continue
            dictionary = dictionaries[(pivot.language, other.language)]
            surviving = [row[pivot.language] for row in rows]
            alignments, n_translated = _intersect(
                surviving, other.categories[name], dictionary
            )
            matched = {src: tgt for src, tgt in alignments}
            rows = [
                {**row, other.language: matched[row[pivot.language]]}
                for row in rows
                if row[pivot.language] in matched
            ]
            stages.append((f"translated:{other.language}", n_translated))
            stages.append((f"coincided:{other.language}", len(rows)))
        stages.append(("aligned", len(rows)))
        kept = len(rows) >= min_pairs
        traces[name] = CategoryTrace(stages=tuple(stages), kept=kept)
        if not kept:
            logger.warning(
                "category %s dropped: %d aligned pairs < min_pairs %d",
                name,
                len(rows),
                min_pairs,
            )
            continue
        corpus[name] = AnalogyCategory(
            name=name,
            kind=pivot.kinds[name],
            pairs_by_language={
                lang: tuple(row[lang] for row in rows) for lang in languages
            },
        )
    report = BuildReport(min_pairs=min_pairs, categories=traces)
    if not corpus:
        raise ValueError("no category survived the build")
    return corpus, report
