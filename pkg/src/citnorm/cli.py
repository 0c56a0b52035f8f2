"""Command-line entry point.

Subcommands: validate, compute, evaluate, category-stats, synth. Every run
writes ``run_meta.json`` with the fully resolved configuration. Exit codes:
0 success (including soft warnings), 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .corpus import CorpusConfig, validate_corpus, write_publications, write_references
from .errors import DataError
from .evaluation import category_stats, evaluate, load_recommendations, write_recommendations
from .pipeline import compute_indicators
from .refsets import partition_reference_sets, reference_set_rows
from .synth import GeneratorSpec, generate_corpus, generate_recommendations
from .table import INDICATOR_COLUMNS, IndicatorTable


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("publications", help="publications file (.tsv or .jsonl)")
    p.add_argument("references", help="references file (.tsv or .jsonl)")
    p.add_argument(
        "--horizon-year",
        type=int,
        default=None,
        help="last year of citation observation (default: latest publication year)",
    )
    p.add_argument(
        "--citable-types",
        default="article,review,letter",
        help="comma-separated doc types that receive indicator scores",
    )
    p.add_argument("--year-min", type=int, default=None, help="reject years below this")


def _load_with_config(args):
    """Read the corpus, defaulting the horizon to the latest year present."""
    from .corpus import Corpus, read_publications, read_references

    pubs = read_publications(args.publications)
    if not pubs:
        raise DataError(f"{args.publications}: no publications")
    horizon = args.horizon_year
    if horizon is None:
        horizon = max(p.year for p in pubs)
    config = CorpusConfig(
        horizon_year=horizon,
        citable_types=frozenset(t for t in args.citable_types.split(",") if t),
        year_min=args.year_min,
    )
    refs = read_references(args.references)
    corpus = Corpus(
        pubs,
        refs,
        horizon_year=config.horizon_year,
        citable_types=config.citable_types,
        year_min=config.year_min,
    )
    return corpus, config


def _write_meta(out_dir: Path, subcommand: str, config: dict, summary: dict | None = None) -> None:
    meta = {
        "artifact": "citnorm",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
    }
    if summary:
        meta["summary"] = summary
    with open(out_dir / "run_meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, fieldnames: list[str], rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()}
            )


def cmd_validate(args) -> int:
    corpus, config = _load_with_config(args)
    report = validate_corpus(corpus)
    if args.json:
        payload = report.to_dict()
        payload["config"] = config.to_dict()
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        d = report.to_dict()
        print(
            f"publications={d['n_publications']} citable={d['n_citable']} "
            f"edges={d['n_edges']} linked={d['n_linked']} unlinked={d['n_unlinked']}"
        )
        for w in report.warnings:
            print(f"warning: {w}")
    return 0


def cmd_compute(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus, config = _load_with_config(args)

    indicators = None
    if args.indicators:
        indicators = tuple(c for c in args.indicators.split(",") if c)
    table = compute_indicators(corpus, indicators=indicators, sncs_window=args.sncs_window)
    table.to_csv(out_dir / "indicators.csv")
    table.to_jsonl(out_dir / "indicators.jsonl")

    if args.dump_refsets:
        rows = reference_set_rows(partition_reference_sets(corpus))
        _write_csv(out_dir / "refsets.csv", ["category", "year", "n", "mean", "min", "max"], rows)

    _write_meta(
        out_dir,
        "compute",
        {
            "publications": str(args.publications),
            "references": str(args.references),
            "corpus": config.to_dict(),
            "indicators": list(table.indicator_names()),
            "sncs_window": args.sncs_window,
            "threads": args.threads,
        },
        summary={"n_rows": len(table.pub_ids), **table.metadata},
    )
    return 0


def cmd_evaluate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = IndicatorTable.read(args.table)
    records = load_recommendations(args.recommendations)
    report = evaluate(
        table,
        records,
        reps=args.reps,
        seed=args.seed,
        first_only=args.first_only,
        threads=args.threads,
        ci_method=args.ci_method,
    )
    with open(out_dir / "evaluation.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_dir / "evaluation.txt", "w", encoding="utf-8") as fh:
        fh.write(report.to_text())
    _write_csv(
        out_dir / "margins.csv",
        ["level", "margin", "ci_low", "ci_high", "indicator"],
        report.margins_rows(),
    )
    _write_meta(
        out_dir,
        "evaluate",
        {
            "table": str(args.table),
            "recommendations": str(args.recommendations),
            "reps": args.reps,
            "seed": args.seed,
            "first_only": args.first_only,
            "threads": args.threads,
            "ci_method": args.ci_method,
        },
        summary=report.metadata,
    )
    return 0


def cmd_category_stats(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus, config = _load_with_config(args)
    rows = category_stats(corpus, top_k=args.top_k, combinations=args.combinations)
    _write_csv(out_dir / "category_stats.csv", ["category", "mean", "min", "max", "n"], rows)
    _write_meta(
        out_dir,
        "category-stats",
        {
            "publications": str(args.publications),
            "references": str(args.references),
            "corpus": config.to_dict(),
            "top_k": args.top_k,
            "combinations": args.combinations,
        },
        summary={"n_rows": len(rows)},
    )
    return 0


def cmd_synth(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    overrides = {}
    if args.papers_per_field_year is not None:
        overrides["papers_per_field_year"] = args.papers_per_field_year
    if args.spec:
        spec = GeneratorSpec.from_file(args.spec, seed=args.seed)
        if overrides:
            obj = spec.to_dict()
            obj.update(overrides)
            spec = GeneratorSpec.from_dict(obj, seed=args.seed)
    else:
        spec = GeneratorSpec.preset(args.preset, seed=args.seed, **overrides)

    corpus = generate_corpus(spec)
    records = generate_recommendations(
        corpus, coupling=spec.coupling, seed=args.seed, rec_share=spec.rec_share
    )
    write_publications(corpus.publications, out_dir / "publications.tsv")
    write_references(corpus.iter_edges(), out_dir / "references.tsv")
    write_recommendations(records, out_dir / "recommendations.tsv")
    _write_meta(
        out_dir,
        "synth",
        {"spec": spec.to_dict(), "seed": args.seed},
        summary={
            "n_publications": len(corpus),
            "n_edges": corpus.n_edges,
            "n_linked": corpus.n_linked,
            "n_unlinked": corpus.n_unlinked,
            "n_recommendations": len(records),
            "horizon_year": corpus.horizon_year,
        },
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citnorm",
        description="Normalized citation impact indicators and evaluation harness",
    )
    parser.add_argument("--version", action="version", version=f"citnorm {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("validate", help="load a corpus and report tallies and warnings")
    _add_corpus_args(p)
    p.add_argument("--json", action="store_true", help="emit the report as JSON on stdout")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compute", help="compute the indicator table")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--indicators",
        default=None,
        help=f"comma-separated subset of: {','.join(INDICATOR_COLUMNS)}",
    )
    p.add_argument("--sncs-window", type=int, default=None, help="fixed SNCS window length")
    p.add_argument("--dump-refsets", action="store_true", help="also write refsets.csv")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("evaluate", help="correlate indicators with recommendations")
    p.add_argument("--table", required=True, help="indicators.csv or indicators.jsonl")
    p.add_argument("--recs", dest="recommendations", required=True, help="recommendations file")
    p.add_argument("--out", required=True)
    p.add_argument("--reps", type=int, default=100, help="bootstrap replicates")
    p.add_argument("--seed", type=int, required=True, help="bootstrap seed (required)")
    p.add_argument("--first-only", action="store_true", help="regress on first recommendations only")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--ci-method", choices=("normal", "percentile"), default="normal")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("category-stats", help="per-category 3-year citation summary")
    _add_corpus_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--top-k", type=int, default=20)
    p.add_argument(
        "--combinations",
        action="store_true",
        help="group by full category combinations instead of single categories",
    )
    p.set_defaults(func=cmd_category_stats)

    p = sub.add_parser("synth", help="generate a synthetic corpus and recommendations")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=("two-cultures", "humanities-stress"))
    group.add_argument("--spec", help="generator spec JSON file")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True, help="generator seed (required)")
    p.add_argument("--papers-per-field-year", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
