"""Reference/hypothesis normalization for fairer WER evaluation.

Agglutinative and code-mixed languages admit many acceptable written forms
of the same spoken content: spelling variants of transliterated words, and
compounds that are equally valid written as separate words. This package
mines both kinds of equivalence from a corpus, validates them against
pronunciation/transliteration/translation evidence, rewrites reference and
hypothesis symmetrically, and reports the WER before and after.
"""

from .corpus import (
    Corpus,
    CorpusLoadError,
    Utterance,
    Vocabulary,
    extract_vocabulary,
    load_corpus,
    tokenize,
    write_corpus,
)
from .evidence import (
    EvidenceRecord,
    EvidenceSource,
    GraphemeRules,
    PivotDictionary,
    PronunciationLexicon,
    RelaxationTable,
    RemotePivotProvider,
)
from .pipeline import (
    EvaluationReport,
    PipelineConfig,
    build_evidence,
    export_review_files,
    format_human_report,
    read_report,
    run_pipeline,
    summarize,
    write_report,
)
from .segmentation import (
    CyclicReplacementError,
    SegmentationNormalizer,
    SegmentationRules,
    SegmenterModel,
    SegPair,
    SegPairTable,
    ValidationPolicy,
    apply_seg_table,
    load_forbidden_initial,
    mine_seg_pairs,
    read_seg_review,
    segment_word,
    train_segmenter,
    validate_split,
    write_seg_review,
)
from .spelling import (
    AgreementPolicy,
    SpellingNormalizer,
    SpellMap,
    UnigramTable,
    VariantVerdict,
    apply_spell_map,
    build_spell_map,
    build_unigram_table,
    generate_candidates,
    judge_pair,
    mine_spell_pairs,
    read_spell_review,
    write_spell_review,
)
from .wer import AlignmentResult, AlignStep, WerScore, align, corpus_wer, werr

__version__ = "0.1.0"

__all__ = [
    "AgreementPolicy",
    "AlignStep",
    "AlignmentResult",
    "Corpus",
    "CorpusLoadError",
    "CyclicReplacementError",
    "EvaluationReport",
    "EvidenceRecord",
    "EvidenceSource",
    "GraphemeRules",
    "PipelineConfig",
    "PivotDictionary",
    "PronunciationLexicon",
    "RelaxationTable",
    "RemotePivotProvider",
    "SegPair",
    "SegPairTable",
    "SegmentationNormalizer",
    "SegmentationRules",
    "SegmenterModel",
    "SpellMap",
    "SpellingNormalizer",
    "UnigramTable",
    "Utterance",
    "ValidationPolicy",
    "VariantVerdict",
    "Vocabulary",
    "WerScore",
    "align",
    "apply_seg_table",
    "apply_spell_map",
    "build_evidence",
    "build_spell_map",
    "build_unigram_table",
    "corpus_wer",
    "export_review_files",
    "extract_vocabulary",
    "format_human_report",
    "generate_candidates",
    "judge_pair",
    "load_corpus",
    "load_forbidden_initial",
    "mine_seg_pairs",
    "mine_spell_pairs",
    "read_report",
    "read_seg_review",
    "read_spell_review",
    "run_pipeline",
    "segment_word",
    "summarize",
    "tokenize",
    "train_segmenter",
    "validate_split",
    "werr",
    "write_corpus",
    "write_report",
    "write_seg_review",
    "write_spell_review",
]
