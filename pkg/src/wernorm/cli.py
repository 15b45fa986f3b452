"""Command line interface.

Subcommands mirror the pipeline stages so the expert review loop needs no
monolithic rerun: mine-spell and mine-seg write review files, normalize
applies reviewed files to a corpus, evaluate runs everything, and report
aggregates finished runs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .corpus import CORPUS_FORMATS, extract_vocabulary, load_corpus, write_corpus
from .pipeline import (
    NORMALIZED_CORPUS,
    ORDERS,
    PipelineConfig,
    build_evidence,
    export_review_files,
    format_human_report,
    read_report,
    run_pipeline,
)
from .segmentation import (
    SEGMENTER_METHODS,
    CyclicReplacementError,
    SegmentationRules,
    SegPairTable,
    ValidationPolicy,
    apply_seg_table,
    load_forbidden_initial,
    mine_seg_pairs,
    read_seg_review,
    train_segmenter,
)
from .spelling import (
    AgreementPolicy,
    apply_spell_map,
    build_spell_map,
    build_unigram_table,
    mine_spell_pairs,
    read_spell_review,
)


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", type=Path, required=True, help="corpus file to read")
    parser.add_argument("--locale", default="", help="language tag recorded in reports")
    parser.add_argument(
        "--format", choices=CORPUS_FORMATS, default="tsv", help="corpus file format"
    )


def _add_provider_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("evidence providers")
    group.add_argument("--lexicon", type=Path, help="pronunciation lexicon (word<TAB>phones)")
    group.add_argument(
        "--grapheme-rules", type=Path, help="grapheme-to-phone rules for lexicon misses"
    )
    group.add_argument(
        "--translit-dict", type=Path, help="transliteration dictionary (word<TAB>pivot form)"
    )
    group.add_argument(
        "--trans-dict", type=Path, help="translation dictionary (word<TAB>pivot form)"
    )
    group.add_argument(
        "--relax-table", type=Path, help="phone relaxation pairs (phoneA phoneB per line)"
    )


def _add_spell_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("spelling miner")
    group.add_argument(
        "--min-agree", type=int, default=2,
        help="minimum number of agreeing signals to accept a pair (default 2)",
    )
    group.add_argument(
        "--require-all", action="store_true",
        help="strict mode: all three signals must be present and agree",
    )


def _add_seg_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("segmentation miner")
    group.add_argument(
        "--seg-method", choices=SEGMENTER_METHODS, default="unigram",
        help="subword segmenter (default unigram)",
    )
    group.add_argument(
        "--max-segments", type=int, default=3, help="largest ngram size (default 3)"
    )
    group.add_argument(
        "--num-merges", type=int, default=500, help="bpe merge count (default 500)"
    )
    group.add_argument(
        "--min-segment-chars", type=int, default=1,
        help="minimum characters per segment (default 1)",
    )
    group.add_argument(
        "--forbidden-initial", type=Path,
        help="file of code points no segment may start with (hex, one per line)",
    )
    group.add_argument(
        "--require-trans", action="store_true",
        help="require the translation check to pass, not merely not fail",
    )
    group.add_argument(
        "--include-hypothesis", action="store_true",
        help="also mine compounds from the hypothesis side",
    )


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--unigrams", type=Path, help="unigram weights file (word<TAB>weight)")
    parser.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    parser.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wernorm",
        description="Standardize spelling variants and compound segmentation "
        "in ASR references and hypotheses, then report base and normalized WER.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="mine, normalize, score, and report in one run")
    _add_corpus_args(p)
    _add_provider_args(p)
    _add_spell_args(p)
    _add_seg_args(p)
    _add_common_args(p)
    p.add_argument(
        "--order", choices=ORDERS, default="seg-then-spell",
        help="which normalizations to apply (default seg-then-spell)",
    )
    p.add_argument(
        "--no-canonical", action="store_true",
        help="score with class-aware token equality instead of rewriting variants",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("mine-spell", help="mine spelling-variant pairs into a review file")
    _add_corpus_args(p)
    _add_provider_args(p)
    _add_spell_args(p)
    _add_common_args(p)
    p.set_defaults(func=cmd_mine_spell)

    p = sub.add_parser("mine-seg", help="mine compound/ngram pairs into a review file")
    _add_corpus_args(p)
    _add_provider_args(p)
    _add_seg_args(p)
    _add_common_args(p)
    p.set_defaults(func=cmd_mine_seg)

    p = sub.add_parser("normalize", help="apply reviewed pair files to a corpus")
    _add_corpus_args(p)
    p.add_argument("--spell-pairs", type=Path, help="reviewed spelling-pair file")
    p.add_argument("--seg-pairs", type=Path, help="reviewed segmentation-pair file")
    _add_common_args(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("report", help="aggregate machine reports from finished runs")
    p.add_argument("reports", type=Path, nargs="+", help="report.json files to aggregate")
    p.set_defaults(func=cmd_report)

    return parser


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = PipelineConfig(
        corpus=args.corpus,
        out_dir=args.out,
        locale=args.locale,
        corpus_format=args.format,
        lexicon=args.lexicon,
        grapheme_rules=args.grapheme_rules,
        translit_dict=args.translit_dict,
        trans_dict=args.trans_dict,
        relax_table=args.relax_table,
        unigram_file=args.unigrams,
        forbidden_initial_file=args.forbidden_initial,
        order=args.order,
        seg_method=args.seg_method,
        max_segments=args.max_segments,
        num_merges=args.num_merges,
        min_segment_chars=args.min_segment_chars,
        min_agree=args.min_agree,
        require_all=args.require_all,
        require_trans=args.require_trans,
        include_hypothesis=args.include_hypothesis,
        no_canonical=args.no_canonical,
        jobs=args.jobs,
    )
    report = run_pipeline(config)
    sys.stdout.write(format_human_report([report]))
    return 0


def _evidence_from_args(args: argparse.Namespace):
    return build_evidence(
        args.lexicon,
        args.grapheme_rules,
        args.translit_dict,
        args.trans_dict,
        args.relax_table,
    )


def cmd_mine_spell(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, locale=args.locale, format=args.format)
    evidence = _evidence_from_args(args)
    vocab = extract_vocabulary(corpus, source="both")
    policy = AgreementPolicy(args.min_agree, args.require_all)
    verdicts = mine_spell_pairs(vocab, evidence, policy, jobs=args.jobs)
    paths = export_review_files(args.out, spell_verdicts=verdicts)
    accepted = sum(1 for v in verdicts if v.accepted)
    print(f"judged {len(verdicts)} candidate pairs, accepted {accepted}")
    print(f"wrote {paths['spell']}")
    return 0


def cmd_mine_seg(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus, locale=args.locale, format=args.format)
    evidence = _evidence_from_args(args)
    vocab = extract_vocabulary(corpus, source="both")
    model = train_segmenter(vocab, args.seg_method, args.max_segments, args.num_merges)
    forbidden = (
        load_forbidden_initial(args.forbidden_initial) if args.forbidden_initial else frozenset()
    )
    table = mine_seg_pairs(
        corpus,
        model,
        evidence,
        SegmentationRules(args.min_segment_chars, forbidden),
        ValidationPolicy(require_trans=args.require_trans),
        build_unigram_table(corpus, args.unigrams),
        include_hypothesis=args.include_hypothesis,
        jobs=args.jobs,
    )
    paths = export_review_files(args.out, seg_pairs=table.verdicts)
    accepted = sum(1 for p in table.verdicts if p.accepted)
    print(f"segmented {len(table.verdicts)} candidate words, accepted {accepted} pairs")
    print(f"wrote {paths['seg']}")
    return 0


def cmd_normalize(args: argparse.Namespace) -> int:
    if args.spell_pairs is None and args.seg_pairs is None:
        raise ValueError("normalize needs --spell-pairs and/or --seg-pairs")
    corpus = load_corpus(args.corpus, locale=args.locale, format=args.format)
    weights = build_unigram_table(corpus, args.unigrams)
    normalized = corpus
    if args.seg_pairs is not None:
        table = SegPairTable.from_pairs(read_seg_review(args.seg_pairs), weights)
        normalized = normalized.map_tokens(lambda t: apply_seg_table(t, table))
    if args.spell_pairs is not None:
        verdicts = read_spell_review(args.spell_pairs)
        spell_map = build_spell_map([v for v in verdicts if v.accepted], weights)
        normalized = normalized.map_tokens(lambda t: apply_spell_map(t, spell_map))
    args.out.mkdir(parents=True, exist_ok=True)
    out_path = args.out / NORMALIZED_CORPUS
    write_corpus(normalized, out_path)
    print(f"wrote {out_path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    reports = [read_report(path) for path in args.reports]
    sys.stdout.write(format_human_report(reports))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (CyclicReplacementError, OSError, ValueError) as exc:
        print(f"wernorm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
