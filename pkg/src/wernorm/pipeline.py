"""End-to-end orchestration: mine, normalize, score, report.

The cascade order is fixed: segmentation normalization first, then spelling
normalization, both applied symmetrically to reference and hypothesis. Each
miner runs once, on the original corpus; per-stage WERs come from
independently normalized copies so the report separates each technique's
contribution from the combined one.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Corpus, extract_vocabulary, load_corpus, write_corpus
from .evidence import (
    EvidenceSource,
    GraphemeRules,
    PivotDictionary,
    PronunciationLexicon,
    RelaxationTable,
    RemotePivotProvider,
)
from .segmentation import (
    SegmentationRules,
    SegPair,
    SegPairTable,
    ValidationPolicy,
    apply_seg_table,
    load_forbidden_initial,
    mine_seg_pairs,
    train_segmenter,
    write_seg_review,
)
from .spelling import (
    AgreementPolicy,
    SpellMap,
    UnigramTable,
    VariantVerdict,
    apply_spell_map,
    build_spell_map,
    build_unigram_table,
    mine_spell_pairs,
    write_spell_review,
)
from .wer import corpus_wer, werr

logger = logging.getLogger(__name__)

ORDERS = ("seg-then-spell", "spell-only", "seg-only")

PIVOT_ENDPOINT_ENV = "WERNORM_PIVOT_ENDPOINT"
PIVOT_KEY_ENV = "WERNORM_PIVOT_KEY"

REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"
SPELL_REVIEW_FILE = "spell_review.tsv"
SEG_REVIEW_FILE = "seg_review.tsv"
NORMALIZED_CORPUS = "normalized.tsv"


@dataclass
class PipelineConfig:
    """Everything one evaluation run needs, validated before any work starts."""

    corpus: Path
    out_dir: Path
    locale: str = ""
    corpus_format: str = "tsv"
    lexicon: Path | None = None
    grapheme_rules: Path | None = None
    translit_dict: Path | None = None
    trans_dict: Path | None = None
    relax_table: Path | None = None
    unigram_file: Path | None = None
    forbidden_initial_file: Path | None = None
    order: str = "seg-then-spell"
    seg_method: str = "unigram"
    max_segments: int = 3
    num_merges: int = 500
    min_segment_chars: int = 1
    min_agree: int = 2
    require_all: bool = False
    require_trans: bool = False
    include_hypothesis: bool = False
    no_canonical: bool = False
    jobs: int = 1

    def validate(self) -> None:
        if self.order not in ORDERS:
            raise ValueError(f"order must be one of {ORDERS}, got {self.order!r}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        missing = [
            str(path)
            for path in (
                self.corpus,
                self.lexicon,
                self.grapheme_rules,
                self.translit_dict,
                self.trans_dict,
                self.relax_table,
                self.unigram_file,
                self.forbidden_initial_file,
            )
            if path is not None and not Path(path).is_file()
        ]
        if missing:
            raise FileNotFoundError("missing input file(s): " + ", ".join(missing))


@dataclass(frozen=True)
class EvaluationReport:
    """All WER variants plus mining statistics for one corpus run.

    WERR values are derived properties, so a report can never carry a
    reduction figure inconsistent with its own stored WERs.
    """

    locale: str
    utterances: int
    ref_tokens: int
    base_wer: float
    spell_wer: float | None = None
    seg_wer: float | None = None
    cascade_wer: float | None = None
    spell_mined: int = 0
    spell_accepted: int = 0
    spell_applied: int = 0
    seg_mined: int = 0
    seg_accepted: int = 0
    seg_applied: int = 0

    def _stage_werr(self, stage_wer: float | None) -> float | None:
        if stage_wer is None or self.base_wer <= 0:
            return None
        return werr(self.base_wer, stage_wer)

    @property
    def spell_werr(self) -> float | None:
        return self._stage_werr(self.spell_wer)

    @property
    def seg_werr(self) -> float | None:
        return self._stage_werr(self.seg_wer)

    @property
    def cascade_werr(self) -> float | None:
        return self._stage_werr(self.cascade_wer)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["spell_werr"] = self.spell_werr
        out["seg_werr"] = self.seg_werr
        out["cascade_werr"] = self.cascade_werr
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


def build_evidence(
    lexicon=None,
    grapheme_rules=None,
    translit_dict=None,
    trans_dict=None,
    relax_table=None,
) -> EvidenceSource:
    """Assemble providers from files, falling back to the env-configured
    remote endpoint for whichever pivot signal has no local dictionary."""
    rules = GraphemeRules.load(grapheme_rules) if grapheme_rules else None
    pron = None
    if lexicon:
        pron = PronunciationLexicon.load(lexicon, rules)
    elif rules is not None:
        pron = PronunciationLexicon(rules=rules)
    translit = PivotDictionary.load(translit_dict) if translit_dict else _remote("transliterate")
    trans = PivotDictionary.load(trans_dict) if trans_dict else _remote("translate")
    relax = RelaxationTable.load(relax_table) if relax_table else None
    return EvidenceSource(pron, translit, trans, relax)


def _remote(mode: str) -> RemotePivotProvider | None:
    endpoint = os.environ.get(PIVOT_ENDPOINT_ENV)
    if not endpoint:
        return None
    return RemotePivotProvider(endpoint, os.environ.get(PIVOT_KEY_ENV), mode=mode)


def _apply_spell(corpus: Corpus, spell_map: SpellMap) -> tuple[Corpus, int]:
    applied = 0

    def rewrite(tokens):
        nonlocal applied
        out = apply_spell_map(tokens, spell_map)
        applied += sum(1 for before, after in zip(tokens, out) if before != after)
        return out

    return corpus.map_tokens(rewrite), applied


def _apply_seg(corpus: Corpus, table: SegPairTable) -> tuple[Corpus, int]:
    counter: dict = {}
    normalized = corpus.map_tokens(lambda tokens: apply_seg_table(tokens, table, counter=counter))
    return normalized, sum(counter.values())


def export_review_files(
    out_dir,
    spell_verdicts: Iterable[VariantVerdict] | None = None,
    seg_pairs: Iterable[SegPair] | None = None,
) -> dict[str, Path]:
    """Write expert review files (accepted rows only) and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    if spell_verdicts is not None:
        path = out_dir / SPELL_REVIEW_FILE
        write_spell_review([v for v in spell_verdicts if v.accepted], path)
        paths["spell"] = path
    if seg_pairs is not None:
        path = out_dir / SEG_REVIEW_FILE
        write_seg_review([p for p in seg_pairs if p.accepted], path)
        paths["seg"] = path
    return paths


def run_pipeline(config: PipelineConfig) -> EvaluationReport:
    """Run the full evaluation and write all artifacts to config.out_dir.

    Artifacts: machine report (JSON, full precision), human report (text
    table, one decimal), review files for each miner that ran, and the
    normalized corpus produced by the requested cascade.
    """
    config.validate()
    corpus = load_corpus(config.corpus, locale=config.locale, format=config.corpus_format)
    if len(corpus) == 0:
        raise ValueError(f"{config.corpus}: corpus has no utterances")
    evidence = build_evidence(
        config.lexicon,
        config.grapheme_rules,
        config.translit_dict,
        config.trans_dict,
        config.relax_table,
    )
    unigrams = build_unigram_table(corpus, config.unigram_file)
    base = corpus_wer(corpus)
    logger.info("base WER %.4f over %d utterances", base.wer, len(corpus))

    spell_map: SpellMap | None = None
    spell_verdicts: tuple[VariantVerdict, ...] = ()
    seg_table: SegPairTable | None = None
    seg_corpus = corpus
    spell_wer = seg_wer = None
    spell_applied = seg_applied = 0

    if config.order in ("seg-then-spell", "seg-only"):
        vocab = extract_vocabulary(corpus, source="both")
        model = train_segmenter(
            vocab, config.seg_method, config.max_segments, config.num_merges
        )
        forbidden = (
            load_forbidden_initial(config.forbidden_initial_file)
            if config.forbidden_initial_file
            else frozenset()
        )
        seg_table = mine_seg_pairs(
            corpus,
            model,
            evidence,
            SegmentationRules(config.min_segment_chars, forbidden),
            ValidationPolicy(require_trans=config.require_trans),
            unigrams,
            include_hypothesis=config.include_hypothesis,
            jobs=config.jobs,
        )
        seg_corpus, seg_applied = _apply_seg(corpus, seg_table)
        seg_wer = corpus_wer(seg_corpus).wer
        logger.info("segmentation WER %.4f with %d pairs", seg_wer, len(seg_table))

    if config.order in ("seg-then-spell", "spell-only"):
        vocab = extract_vocabulary(corpus, source="both")
        policy = AgreementPolicy(config.min_agree, config.require_all)
        spell_verdicts = mine_spell_pairs(vocab, evidence, policy, jobs=config.jobs)
        spell_map = build_spell_map([v for v in spell_verdicts if v.accepted], unigrams)
        if config.no_canonical:
            spell_wer = corpus_wer(corpus, equal=spell_map.equality()).wer
            _, spell_applied = _apply_spell(corpus, spell_map)
        else:
            spell_corpus, spell_applied = _apply_spell(corpus, spell_map)
            spell_wer = corpus_wer(spell_corpus).wer
        logger.info("spelling WER %.4f with %d classes", spell_wer, len(spell_map))

    cascade_corpus = seg_corpus
    if spell_map is not None and config.no_canonical:
        cascade_wer = corpus_wer(cascade_corpus, equal=spell_map.equality()).wer
        cascade_corpus, _ = _apply_spell(cascade_corpus, spell_map)  # artifact only
    else:
        if spell_map is not None:
            cascade_corpus, _ = _apply_spell(cascade_corpus, spell_map)
        cascade_wer = corpus_wer(cascade_corpus).wer

    report = EvaluationReport(
        locale=corpus.locale,
        utterances=len(corpus),
        ref_tokens=base.ref_len,
        base_wer=base.wer,
        spell_wer=spell_wer,
        seg_wer=seg_wer,
        cascade_wer=cascade_wer,
        spell_mined=len(spell_verdicts),
        spell_accepted=sum(1 for v in spell_verdicts if v.accepted),
        spell_applied=spell_applied,
        seg_mined=len(seg_table.verdicts) if seg_table is not None else 0,
        seg_accepted=sum(1 for p in seg_table.verdicts if p.accepted) if seg_table else 0,
        seg_applied=seg_applied,
    )

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report(report, out_dir / REPORT_JSON)
    (out_dir / REPORT_TEXT).write_text(format_human_report([report]), encoding="utf-8")
    export_review_files(
        out_dir,
        spell_verdicts=spell_verdicts if spell_map is not None else None,
        seg_pairs=seg_table.verdicts if seg_table is not None else None,
    )
    write_corpus(cascade_corpus, out_dir / NORMALIZED_CORPUS)
    return report


def write_report(report: EvaluationReport, path) -> None:
    """Machine report: JSON, full precision, stable key order."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, ensure_ascii=False, sort_keys=True, indent=2)
        fh.write("\n")


def read_report(path) -> EvaluationReport:
    with open(path, encoding="utf-8") as fh:
        return EvaluationReport.from_dict(json.load(fh))


def summarize(reports: Sequence[EvaluationReport | float]) -> dict:
    """Aggregate cascade WERRs across runs: unweighted arithmetic mean.

    Accepts full reports or bare cascade-WERR numbers.
    """
    if not reports:
        raise ValueError("summarize needs at least one report")
    werrs: list[float] = []
    by_locale: dict[str, float] = {}
    for item in reports:
        if isinstance(item, EvaluationReport):
            value = item.cascade_werr
            if value is None:
                continue
            werrs.append(value)
            if item.locale:
                by_locale[item.locale] = value
        else:
            werrs.append(float(item))
    if not werrs:
        raise ValueError("no report carries a cascade WERR")
    return {
        "count": len(werrs),
        "mean_cascade_werr": sum(werrs) / len(werrs),
        "by_locale": by_locale,
    }


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.1f}"


def format_human_report(reports: Sequence[EvaluationReport]) -> str:
    """Aligned text table, one row per corpus, all numbers to one decimal."""
    header = (
        "Lang", "Utt", "Base WER",
        "Spell WER", "WERR", "Seg WER", "WERR", "Both WER", "WERR",
    )
    rows = [header]
    for r in reports:
        rows.append(
            (
                r.locale or "-",
                str(r.utterances),
                _fmt(r.base_wer),
                _fmt(r.spell_wer),
                _fmt(r.spell_werr),
                _fmt(r.seg_wer),
                _fmt(r.seg_werr),
                _fmt(r.cascade_wer),
                _fmt(r.cascade_werr),
            )
        )
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    if len(reports) > 1:
        try:
            summary = summarize(list(reports))
        except ValueError:
            summary = None
        if summary is not None:
            lines.append("")
            lines.append(f"Mean cascade WERR: {summary['mean_cascade_werr']:.1f}")
    return "\n".join(lines) + "\n"
