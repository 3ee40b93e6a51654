"""Building a fully parallel analogy corpus from monolingual sets.

Each source pair is translated through a dictionary; a pair survives when
some translation coincides with a pair of the target-language set, and the
intersection repeats across all languages.  The report shows how many rows
survive each stage and which categories fall under the minimum-pair
threshold.
"""

from anlgmap import BilingualDictionary, MonolingualAnalogySet, build_corpus

aa = MonolingualAnalogySet(
    "aa",
    {"CAP": (
        ("paris", "france"), ("rome", "italy"), ("tokyo", "japan"),
        ("cairo", "egypt"), ("lima", "peru"),
    )},
    {"CAP": "semantic"},
)
bb = MonolingualAnalogySet(
    "bb",
    {"CAP": (
        ("pariis", "prantsusmaa"), ("rooma", "itaalia"), ("tokio", "jaapan"),
        ("liima", "muu"),
    )},
    {"CAP": "semantic"},
)
cc = MonolingualAnalogySet(
    "cc",
    {"CAP": (("parizo", "francio"), ("romo", "germanio"), ("tokjo", "japanio"))},
    {"CAP": "semantic"},
)

dict_ab = BilingualDictionary(
    "aa", "bb",
    (
        ("paris", "pariis"), ("france", "prantsusmaa"),
        ("rome", "rooma"), ("italy", "itaalia"),
        ("tokyo", "tokio"), ("japan", "jaapan"),
        ("cairo", "kairo"), ("lima", "liima"), ("peru", "peruu"),
    ),
)
dict_ac = BilingualDictionary(
    "aa", "cc",
    (
        ("paris", "parizo"), ("france", "francio"),
        ("rome", "romo"), ("italy", "italio"),
        ("tokyo", "tokjo"), ("japan", "japanio"),
    ),
)

corpus, report = build_corpus(
    [aa, bb, cc],
    {("aa", "bb"): dict_ab, ("aa", "cc"): dict_ac},
    min_pairs=2,
)

trace = report.categories["CAP"]
print("pipeline stages (rows can only shrink):")
for stage, count in trace.stages:
    print(f"  {stage:15s} {count}")

category = corpus["CAP"]
print("\nfully parallel rows:")
for i in range(len(category)):
    row = " | ".join(
        "/".join(category.pairs(lang)[i]) for lang in category.languages
    )
    print(f"  {row}")
