"""Command-line entry point.

Subcommands: fit-map, analogy-eval, indicators, correlate, build-xanlg,
verify-pae, synth.  Every run echoes its configuration into the report it
writes, reports are byte-deterministic for identical inputs, and exit codes
are 0 (success), 1 (validation problem, reported before any computation
starts), or 2 (internal error).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import builder, stats, synthetic, transport
from .analogy import LRCosConfig, SOLVERS, category_accuracy, read_corpus, write_corpus
from .embeddings import Embedding, load_text_vectors_cached
from .mapping import build_aligned, category_dictionary, fit_linear_closed, fit_linear_gd, load_muse_dictionary

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SUBCOMMANDS = (
    "fit-map",
    "analogy-eval",
    "indicators",
    "correlate",
    "build-xanlg",
    "verify-pae",
    "synth",
)


class CommandLineError(ValueError):
    """A problem the caller can fix: bad flags, missing files, bad formats."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CommandLineError(f"{message}\n{self.format_usage()}")


def _float_repr(value: float) -> str:
    return repr(float(value))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(
        json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n",
        encoding="utf-8",
    )


def _report_payload(command: str, config: dict, results) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
    }


def _parse_lang_path(values: list[str], flag: str) -> dict[str, Path]:
    out: dict[str, Path] = {}
    for value in values:
        if "=" not in value:
            raise CommandLineError(f"{flag} expects <lang>=<path>, got {value!r}")
        lang, _, path = value.partition("=")
        if not lang or not path:
            raise CommandLineError(f"{flag} expects <lang>=<path>, got {value!r}")
        if lang in out:
            raise CommandLineError(f"{flag}: duplicate language {lang!r}")
        out[lang] = Path(path)
    return out


def _parse_pair_path(values: list[str], flag: str) -> dict[tuple[str, str], Path]:
    out: dict[tuple[str, str], Path] = {}
    for value in values:
        if "=" not in value:
            raise CommandLineError(f"{flag} expects <lg1>-<lg2>=<path>, got {value!r}")
        langs, _, path = value.partition("=")
        parts = langs.split("-")
        if len(parts) != 2 or not all(parts) or not path:
            raise CommandLineError(f"{flag} expects <lg1>-<lg2>=<path>, got {value!r}")
        out[(parts[0], parts[1])] = Path(path)
    return out


def _require_files(paths) -> None:
    for path in paths:
        if not Path(path).exists():
            raise CommandLineError(f"no such file or directory: {path}")


def _load_embeddings(
    by_lang: dict[str, Path], limit: int | None, lowercase: bool
) -> dict[str, Embedding]:
    return {
        lang: load_text_vectors_cached(path, limit, language=lang, lowercase=lowercase)
        for lang, path in by_lang.items()
    }


def _single_category(corpus: dict, name: str | None, flag: str = "--category"):
    if name is None:
        if len(corpus) == 1:
            return next(iter(corpus.values()))
        raise CommandLineError(
            f"{flag} is required when the corpus holds several categories: "
            f"{sorted(corpus)}"
        )
    if name not in corpus:
        raise CommandLineError(f"category {name!r} not in corpus: {sorted(corpus)}")
    return corpus[name]


def _build_parser() -> _Parser:
    parser = _Parser(prog="anlgmap", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    subparsers = parser.add_subparsers(dest="command")

    p = subparsers.add_parser("fit-map", parents=[], description="Fit the best linear map between two spaces")
    p.add_argument("--emb-x", required=True, metavar="LANG=PATH")
    p.add_argument("--emb-y", required=True, metavar="LANG=PATH")
    p.add_argument("--dict", dest="dictionary", metavar="PATH")
    p.add_argument("--analogy", metavar="DIR")
    p.add_argument("--category")
    p.add_argument("--limit", type=int)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--fit", choices=("gd", "closed"), default="gd")
    p.add_argument("--report", required=True, metavar="PATH")

    p = subparsers.add_parser("analogy-eval", description="Score analogy completion per category")
    p.add_argument("--emb", action="append", required=True, metavar="LANG=PATH")
    p.add_argument("--analogy", required=True, metavar="DIR")
    p.add_argument("--solver", choices=SOLVERS, default="lrcos")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--category")
    p.add_argument("--limit", type=int)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--include-all-positives", action="store_true")
    p.add_argument("--report", required=True, metavar="PATH")

    p = subparsers.add_parser("indicators", description="Build the indicator grid over language pairs")
    p.add_argument("--emb", action="append", required=True, metavar="LANG=PATH")
    p.add_argument("--analogy", required=True, metavar="DIR")
    p.add_argument("--series", required=True)
    p.add_argument("--solver", choices=SOLVERS, default="lrcos")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fit", choices=("gd", "closed"), default="gd")
    p.add_argument("--limit", type=int)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--jobs", type=int)
    p.add_argument("--report", required=True, metavar="GRID_CSV")
    p.add_argument("--json", metavar="PATH")

    p = subparsers.add_parser("correlate", description="Correlate the two indicators over a grid")
    p.add_argument("--grid", required=True, metavar="GRID_CSV")
    p.add_argument("--group-by", default="series,category")
    p.add_argument("--permute", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", required=True, metavar="PATH")

    p = subparsers.add_parser("build-xanlg", description="Build a parallel cross-lingual analogy corpus")
    p.add_argument("--set", action="append", required=True, metavar="LANG=DIR")
    p.add_argument("--dict", dest="dictionaries", action="append", required=True, metavar="LG1-LG2=PATH")
    p.add_argument("--min-pairs", type=int, default=30)
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--report", metavar="PATH")

    p = subparsers.add_parser("verify-pae", description="Check a category's pairing against all alternatives")
    p.add_argument("--emb", required=True, metavar="LANG=PATH")
    p.add_argument("--analogy", required=True, metavar="DIR")
    p.add_argument("--category")
    p.add_argument("--cost", choices=transport.COST_KINDS, default="euclidean")
    p.add_argument("--cap", type=int, default=12)
    p.add_argument("--max-pairs", type=int)
    p.add_argument("--limit", type=int)
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--report", required=True, metavar="PATH")

    p = subparsers.add_parser("synth", description="Evaluate synthetic spaces across distortion levels")
    p.add_argument("--spec", required=True, metavar="PATH")
    p.add_argument("--sweep", metavar="KIND=START:STOP:STEP")
    p.add_argument("--solver", choices=SOLVERS, default="lrcos")
    p.add_argument("--fit", choices=("gd", "closed"), default="gd")
    p.add_argument("--out", required=True, metavar="CSV")
    p.add_argument("--report", metavar="PATH")
    return parser


def _cmd_fit_map(args: argparse.Namespace) -> dict:
    emb_x = _parse_lang_path([args.emb_x], "--emb-x")
    emb_y = _parse_lang_path([args.emb_y], "--emb-y")
    (lang_x, path_x), = emb_x.items()
    (lang_y, path_y), = emb_y.items()
    if args.dictionary is None and args.analogy is None:
        raise CommandLineError("provide --dict or --analogy with --category")
    _require_files([path_x, path_y])
    if args.dictionary is not None:
        _require_files([args.dictionary])
    if args.analogy is not None:
        _require_files([args.analogy])
    embeddings = _load_embeddings({**emb_x, **emb_y}, args.limit, args.lowercase)
    if args.dictionary is not None:
        dictionary = load_muse_dictionary(args.dictionary, lang_x, lang_y)
    else:
        corpus = read_corpus(args.analogy)
        category = _single_category(corpus, args.category)
        dictionary = category_dictionary(category, lang_x, lang_y)
    pair = build_aligned(embeddings[lang_x], embeddings[lang_y], dictionary)
    fitted = fit_linear_gd(pair) if args.fit == "gd" else fit_linear_closed(pair)
    return {
        "lang_x": lang_x,
        "lang_y": lang_y,
        "rows": len(pair),
        "s_lmp": fitted.s_lmp,
        "residual": fitted.residual,
        "iterations": fitted.iterations,
        "converged": fitted.converged,
    }


def _cmd_analogy_eval(args: argparse.Namespace) -> dict:
    by_lang = _parse_lang_path(args.emb, "--emb")
    _require_files(list(by_lang.values()) + [args.analogy])
    embeddings = _load_embeddings(by_lang, args.limit, args.lowercase)
    corpus = read_corpus(args.analogy)
    if args.category is not None:
        corpus = {args.category: _single_category(corpus, args.category)}
    config = LRCosConfig(seed=args.seed, leave_one_out=not args.include_all_positives)
    cells = []
    for name in sorted(corpus):
        category = corpus[name]
        for lang in sorted(by_lang):
            if lang not in category.languages:
                continue
            result = category_accuracy(embeddings[lang], category, args.solver, config)
            cells.append(
                {
                    "category": name,
                    "language": lang,
                    "solver": args.solver,
                    "accuracy": result.accuracy,
                    "answered": result.answered,
                    "skipped_oov": result.skipped_oov,
                }
            )
    if not cells:
        raise CommandLineError("no (language, category) cell could be evaluated")
    return {"cells": cells}


def _cmd_indicators(args: argparse.Namespace) -> dict:
    by_lang = _parse_lang_path(args.emb, "--emb")
    _require_files(list(by_lang.values()) + [args.analogy])
    embeddings = _load_embeddings(by_lang, args.limit, args.lowercase)
    corpus = read_corpus(args.analogy)
    records = stats.build_indicator_grid(
        embeddings,
        corpus,
        series=args.series,
        solver=args.solver,
        lrcos_config=LRCosConfig(seed=args.seed),
        fit=args.fit,
        jobs=args.jobs,
    )
    stats.write_grid_csv(records, args.report)
    results = {"rows": len(records), "grid_csv": str(args.report)}
    if args.json:
        reports, anova = stats.correlate_records(records)
        results["groups"] = [
            {
                "group_key": list(report.group_key),
                "n": report.n,
                "spearman_rho": report.spearman_rho,
                "pearson_r": report.pearson_r,
                "p_spearman": report.p_spearman,
                "p_pearson": report.p_pearson,
            }
            for report in reports
        ]
        results["anova_semantic_vs_syntactic"] = anova
        _write_json(Path(args.json), _report_payload("indicators", _config_echo(args), results))
    return results


def _cmd_correlate(args: argparse.Namespace) -> dict:
    _require_files([args.grid])
    records = stats.read_grid_csv(args.grid)
    group_by = tuple(field for field in args.group_by.split(",") if field)
    reports, anova = stats.correlate_records(
        records, group_by, n_permutations=args.permute, seed=args.seed
    )
    return {
        "groups": [
            {
                "group_key": list(report.group_key),
                "n": report.n,
                "spearman_rho": report.spearman_rho,
                "pearson_r": report.pearson_r,
                "p_spearman": report.p_spearman,
                "p_pearson": report.p_pearson,
            }
            for report in reports
        ],
        "anova_semantic_vs_syntactic": anova,
    }


def _cmd_build_xanlg(args: argparse.Namespace) -> dict:
    set_dirs = _parse_lang_path(args.set, "--set")
    dict_paths = _parse_pair_path(args.dictionaries, "--dict")
    _require_files(list(set_dirs.values()) + list(dict_paths.values()))
    sets = [builder.load_monolingual_set(path, lang) for lang, path in set_dirs.items()]
    dictionaries = {
        pair: load_muse_dictionary(path, pair[0], pair[1])
        for pair, path in dict_paths.items()
    }
    corpus, report = builder.build_corpus(sets, dictionaries, min_pairs=args.min_pairs)
    out_dir = Path(args.out)
    write_corpus(corpus.values(), out_dir)
    trace = {
        name: {"stages": [[stage, count] for stage, count in t.stages], "kept": t.kept}
        for name, t in report.categories.items()
    }
    results = {
        "out_dir": str(out_dir),
        "kept": sorted(corpus),
        "dropped": list(report.dropped()),
        "min_pairs": report.min_pairs,
        "trace": trace,
    }
    if args.report:
        _write_json(Path(args.report), _report_payload("build-xanlg", _config_echo(args), results))
    return results


def _cmd_verify_pae(args: argparse.Namespace) -> dict:
    by_lang = _parse_lang_path([args.emb], "--emb")
    (lang, path), = by_lang.items()
    _require_files([path, args.analogy])
    embeddings = _load_embeddings(by_lang, args.limit, args.lowercase)
    corpus = read_corpus(args.analogy)
    category = _single_category(corpus, args.category)
    pairs = category.pairs(lang)
    if args.max_pairs is not None:
        pairs = pairs[: args.max_pairs]
    embedding = embeddings[lang]
    vectors = []
    reference = []
    index = 0
    for word_a, word_b in pairs:
        if word_a not in embedding or word_b not in embedding:
            continue
        vectors.append(embedding.vector(word_a))
        vectors.append(embedding.vector(word_b))
        reference.append((index, index + 1))
        index += 2
    if len(vectors) < 4:
        raise CommandLineError("need at least 2 in-vocabulary pairs to verify")
    is_optimal, ranked = transport.verify_best_pairing(
        np.asarray(vectors), reference, args.cost, cap=args.cap
    )
    reference_cost = next(
        s.cost for s in ranked if s.pairs == tuple(tuple(sorted(p)) for p in reference)
    )
    return {
        "language": lang,
        "category": category.name,
        "cost_kind": args.cost,
        "n_vectors": len(vectors),
        "n_matchings": len(ranked),
        "is_optimal": is_optimal,
        "reference_cost": reference_cost,
        "best_cost": ranked[0].cost,
        "ranked_head": [
            {"pairs": [list(p) for p in scheme.pairs], "cost": scheme.cost}
            for scheme in ranked[:50]
        ],
    }


def _parse_sweep(sweep: str) -> tuple[str, list[float]]:
    if "=" not in sweep:
        raise CommandLineError(f"--sweep expects KIND=START:STOP:STEP, got {sweep!r}")
    kind_name, _, span = sweep.partition("=")
    kinds = {"lambda": "radial", "angle": "split_linear"}
    if kind_name not in kinds:
        raise CommandLineError(
            f"--sweep kind must be 'lambda' or 'angle', got {kind_name!r}"
        )
    parts = span.split(":")
    if len(parts) != 3:
        raise CommandLineError(f"--sweep expects START:STOP:STEP, got {span!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise CommandLineError(f"--sweep expects numeric START:STOP:STEP, got {span!r}") from None
    if step <= 0 or stop < start:
        raise CommandLineError(f"--sweep range {span!r} is empty")
    levels = []
    i = 0
    while True:
        level = start + i * step
        if level > stop + 1e-12:
            break
        levels.append(level)
        i += 1
    return kinds[kind_name], levels


def _load_synth_spec(path: Path) -> synthetic.SynthSpec:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CommandLineError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise CommandLineError(f"{path}: spec must be a JSON object")
    distortion = synthetic.Distortion()
    if "distortion" in raw:
        info = raw["distortion"]
        distortion = synthetic.Distortion(
            kind=info.get("kind", "none"), level=float(info.get("level", 0.0))
        )
    known = {"n_pairs", "dim", "noise_sigma", "seed", "n_fillers", "language", "category"}
    unknown = set(raw) - known - {"distortion"}
    if unknown:
        raise CommandLineError(f"{path}: unknown spec fields {sorted(unknown)}")
    if "n_pairs" not in raw or "dim" not in raw:
        raise CommandLineError(f"{path}: spec needs at least n_pairs and dim")
    try:
        return synthetic.SynthSpec(
            n_pairs=int(raw["n_pairs"]),
            dim=int(raw["dim"]),
            noise_sigma=float(raw.get("noise_sigma", 0.0)),
            distortion=distortion,
            seed=int(raw.get("seed", 0)),
            n_fillers=int(raw.get("n_fillers", 40)),
            language=str(raw.get("language", "xa")),
            category=str(raw.get("category", "SYN")),
        )
    except ValueError as exc:
        raise CommandLineError(f"{path}: {exc}") from None


def _write_sweep_csv(rows: list[synthetic.SweepRow], path: Path) -> None:
    lines = ["level,s_lmp,lrcos_x,lrcos_y,s_pae,seed"]
    for row in rows:
        lines.append(
            ",".join(
                [
                    _float_repr(row.level),
                    _float_repr(row.s_lmp),
                    _float_repr(row.lrcos_x),
                    _float_repr(row.lrcos_y),
                    _float_repr(row.s_pae),
                    str(row.seed),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_synth(args: argparse.Namespace) -> dict:
    spec_path = Path(args.spec)
    _require_files([spec_path])
    base = _load_synth_spec(spec_path)
    if args.sweep:
        kind, levels = _parse_sweep(args.sweep)
        grid = synthetic.build_sweep_grid(base, kind, levels)
        rows = [
            synthetic.evaluate_point(spec, solver=args.solver, fit=args.fit)
            for spec in grid
        ]
    else:
        rows = [synthetic.evaluate_point(base, solver=args.solver, fit=args.fit)]
    out_path = Path(args.out)
    _write_sweep_csv(rows, out_path)
    results: dict = {"points": len(rows), "csv": str(out_path)}
    if args.report:
        correlation: dict
        try:
            rho, p = synthetic.sweep_correlation(rows)
            shuffled_rho, shuffled_p = synthetic.shuffled_control(rows, base.seed)
            correlation = {
                "spearman_rho": rho,
                "p_value": p,
                "shuffled_rho": shuffled_rho,
                "shuffled_p": shuffled_p,
            }
        except ValueError as exc:
            correlation = {"spearman_rho": None, "p_value": None, "note": str(exc)}
        results["correlation"] = correlation
        _write_json(Path(args.report), _report_payload("synth", _config_echo(args), results))
    return results


def _config_echo(args: argparse.Namespace) -> dict:
    config = {}
    for key, value in sorted(vars(args).items()):
        if key == "command":
            continue
        if isinstance(value, Path):
            value = str(value)
        config[key] = value
    return config


_HANDLERS = {
    "fit-map": _cmd_fit_map,
    "analogy-eval": _cmd_analogy_eval,
    "indicators": _cmd_indicators,
    "correlate": _cmd_correlate,
    "build-xanlg": _cmd_build_xanlg,
    "verify-pae": _cmd_verify_pae,
    "synth": _cmd_synth,
}

# These subcommands write the report payload at --report; the others manage
# their own outputs (CSV grids, corpus directories, sweep CSVs).
_JSON_REPORT_COMMANDS = ("fit-map", "analogy-eval", "correlate", "verify-pae")


def dispatch(argv: list[str]) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise CommandLineError(parser.format_usage())
        logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING))
        results = _HANDLERS[args.command](args)
        if args.command in _JSON_REPORT_COMMANDS:
            _write_json(
                Path(args.report),
                _report_payload(args.command, _config_echo(args), results),
            )
        return 0
    except (CommandLineError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - deliberate catch-all boundary
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
