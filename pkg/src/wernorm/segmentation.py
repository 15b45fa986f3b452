"""Compound/ngram mining and segmentation normalization.

A subword segmenter proposes splits of corpus words into smaller vocabulary
words; each split is validated against pronunciation, translation, and
character rules. Surviving (compound, ngram) pairs are applied in the join
direction: every occurrence of the ngram is replaced by its compound.
"""

from __future__ import annotations

import logging
import math
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Corpus, Vocabulary, extract_vocabulary
from .evidence import EvidenceSource, PhoneSeq
from .spelling import UNAVAILABLE, UnigramTable, _parse_bool
from .validation import check_positive, check_token_sequences

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"

SEGMENTER_METHODS = ("unigram", "bpe")

SEG_REVIEW_HEADER = (
    "compound", "segments", "pronunciation", "translation", "rules", "accepted",
)

_FORBIDDEN_CATEGORIES = ("Mn", "Mc", "Me")


class CyclicReplacementError(RuntimeError):
    """Raised when replacement passes keep firing past the pass bound."""

    def __init__(self, ngrams: Sequence[tuple[str, ...]]):
        self.ngrams = tuple(ngrams)
        listed = "; ".join(" ".join(n) for n in self.ngrams)
        super().__init__(
            f"segment replacement did not reach a fixpoint; still firing: {listed}"
        )


@dataclass(frozen=True)
class SegPair:
    """One candidate (compound, segment ngram) with its validation outcomes."""

    compound: str
    segments: tuple[str, ...]
    pronunciation: str
    translation: str
    rules: str
    accepted: bool

    def __post_init__(self):
        if len(self.segments) < 2:
            raise ValueError(f"{self.compound!r}: a split needs at least 2 segments")
        if "".join(self.segments) != self.compound:
            raise ValueError(
                f"segments {list(self.segments)} do not concatenate to {self.compound!r}"
            )


@dataclass(frozen=True)
class ValidationPolicy:
    """Which checks gate acceptance of a candidate split.

    Pronunciation must pass by default (a provider miss rejects); a failed
    translation always vetoes, but a missing one is tolerated unless
    require_trans is set. Rule checks always must pass.
    """

    require_pron: bool = True
    require_trans: bool = False

    def accepts(self, pron: str, trans: str, rules: str) -> bool:
        if rules != PASS or pron == FAIL or trans == FAIL:
            return False
        if self.require_pron and pron != PASS:
            return False
        if self.require_trans and trans != PASS:
            return False
        return True


class SegmentationRules:
    """Character-level split validity rules.

    No segment may begin with a combining mark (or any configured forbidden
    code point), and each segment must reach a minimum character length.
    """

    def __init__(self, min_segment_chars: int = 1, forbidden_initial: Iterable[str] = ()):
        check_positive("min_segment_chars", min_segment_chars)
        self.min_segment_chars = min_segment_chars
        self.forbidden_initial = frozenset(forbidden_initial)

    def check(self, segments: Sequence[str]) -> str:
        for segment in segments:
            if len(segment) < self.min_segment_chars:
                return FAIL
            initial = segment[0]
            if initial in self.forbidden_initial:
                return FAIL
            if unicodedata.category(initial) in _FORBIDDEN_CATEGORIES:
                return FAIL
        return PASS


def load_forbidden_initial(path) -> frozenset[str]:
    """Load a forbidden-initial-character file: one hex code point or
    hex-hex range per line, # comments allowed."""
    chars: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            lo, sep, hi = line.partition("-")
            try:
                start = int(lo, 16)
                end = int(hi, 16) if sep else start
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: expected a hex code point or range, got {line!r}"
                ) from None
            if end < start:
                raise ValueError(f"{path}:{lineno}: empty range {line!r}")
            chars.update(chr(c) for c in range(start, end + 1))
    return frozenset(chars)


class SegmenterModel:
    """Shared segmenter surface: a trained model proposing one best split."""

    method: str

    def __init__(self, vocabulary: Mapping[str, int], max_segments: int = 3):
        if not vocabulary:
            raise ValueError("segmenter training needs a non-empty vocabulary")
        if max_segments < 2:
            raise ValueError(f"max_segments must be >= 2, got {max_segments}")
        self.vocabulary = dict(vocabulary)
        self.max_segments = max_segments
        self._total = sum(self.vocabulary.values())

    def _log_freq(self, unit: str) -> float | None:
        count = self.vocabulary.get(unit, 0)
        if count <= 0:
            return None
        return math.log(count / self._total)

    def segment(self, word: str) -> tuple[str, ...] | None:
        raise NotImplementedError


class UnigramSegmenter(SegmenterModel):
    """Viterbi segmentation over vocabulary words as units.

    The best split maximizes the product of segment relative frequencies
    among segmentations into at most max_segments in-vocabulary units; the
    unsplit word competes as the one-unit segmentation, so a word is only
    split when the split genuinely outscores it.
    """

    method = "unigram"

    def segment(self, word: str) -> tuple[str, ...] | None:
        n = len(word)
        if n < 2:
            return None
        # best[i][k]: (score, split_point) for word[:i] in exactly k units
        best: list[dict[int, tuple[float, int]]] = [dict() for _ in range(n + 1)]
        best[0][0] = (0.0, -1)
        for i in range(1, n + 1):
            for j in range(i):
                unit_score = self._log_freq(word[j:i])
                if unit_score is None:
                    continue
                for k, (score, _) in best[j].items():
                    if k >= self.max_segments:
                        continue
                    candidate = (score + unit_score, j)
                    current = best[i].get(k + 1)
                    if current is None or candidate > current:
                        best[i][k + 1] = candidate
        final = best[n]
        split_options = [(score, k) for k, (score, _) in final.items() if k >= 2]
        if not split_options:
            return None
        split_score, split_k = max(split_options, key=lambda t: (t[0], -t[1]))
        whole = self._log_freq(word)
        if whole is not None and whole >= split_score:
            return None
        segments: list[str] = []
        i, k = n, split_k
        while k > 0:
            _, j = best[i][k]
            segments.append(word[j:i])
            i, k = j, k - 1
        segments.reverse()
        return tuple(segments)


class BpeSegmenter(SegmenterModel):
    """Byte-pair segmentation constrained to vocabulary-word segments.

    Merges are learned over the count-weighted vocabulary; at segmentation
    time they replay in order and the result is kept only when every
    segment is itself a vocabulary word.
    """

    method = "bpe"

    def __init__(
        self,
        vocabulary: Mapping[str, int],
        max_segments: int = 3,
        num_merges: int = 500,
    ):
        super().__init__(vocabulary, max_segments)
        check_positive("num_merges", num_merges)
        self.num_merges = num_merges
        self.merge_rules: tuple[tuple[str, str], ...] = self._learn_merges()

    def _learn_merges(self) -> tuple[tuple[str, str], ...]:
        words: dict[tuple[str, ...], int] = {
            tuple(word): count for word, count in self.vocabulary.items() if len(word) > 1
        }
        rules: list[tuple[str, str]] = []
        for _ in range(self.num_merges):
            counts: dict[tuple[str, str], int] = {}
            for symbols, count in words.items():
                for pair in zip(symbols, symbols[1:]):
                    counts[pair] = counts.get(pair, 0) + count
            if not counts:
                break
            pair, best_count = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            if best_count < 2:
                break
            rules.append(pair)
            words = {
                _merge_symbols(symbols, pair): count for symbols, count in words.items()
            }
        return tuple(rules)

    def segment(self, word: str) -> tuple[str, ...] | None:
        if len(word) < 2:
            return None
        symbols = tuple(word)
        for pair in self.merge_rules:
            if len(symbols) == 1:
                break
            symbols = _merge_symbols(symbols, pair)
        if not 2 <= len(symbols) <= self.max_segments:
            return None
        if any(s not in self.vocabulary for s in symbols):
            return None
        return symbols


def _merge_symbols(symbols: tuple[str, ...], pair: tuple[str, str]) -> tuple[str, ...]:
    out: list[str] = []
    i = 0
    joined = pair[0] + pair[1]
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            out.append(joined)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def train_segmenter(
    vocab: Vocabulary | Mapping[str, int],
    method: str = "unigram",
    max_segments: int = 3,
    num_merges: int = 500,
) -> SegmenterModel:
    """Train a segmenter over a word-frequency vocabulary."""
    entries = vocab.entries if isinstance(vocab, Vocabulary) else vocab
    if method == "unigram":
        return UnigramSegmenter(entries, max_segments)
    if method == "bpe":
        return BpeSegmenter(entries, max_segments, num_merges)
    raise ValueError(f"unknown segmenter method {method!r}; choose from {SEGMENTER_METHODS}")


def segment_word(model: SegmenterModel, word: str) -> tuple[str, ...] | None:
    """Best split of a word into 2..max_segments units, or None."""
    return model.segment(word)


def _pron_concat_check(
    compound: str, segments: Sequence[str], evidence: EvidenceSource
) -> str:
    compound_prons = set(evidence.relaxed_pronunciations(compound))
    if not compound_prons:
        return UNAVAILABLE
    per_segment: list[tuple[PhoneSeq, ...]] = []
    for segment in segments:
        prons = evidence.relaxed_pronunciations(segment)
        if not prons:
            return UNAVAILABLE
        per_segment.append(prons)
    for combo in product(*per_segment):
        joined: tuple[str, ...] = sum(combo, ())
        if joined in compound_prons:
            return PASS
    return FAIL


def validate_split(
    compound: str,
    segments: Sequence[str],
    evidence: EvidenceSource,
    rules: SegmentationRules | None = None,
    policy: ValidationPolicy | None = None,
) -> SegPair:
    """Validate one candidate split against all three check families.

    The pronunciation check passes when any compound pronunciation equals
    the concatenation of any combination of segment pronunciations, after
    relaxation. The translation check compares the compound's translation
    with the space-joined ngram's.
    """
    segments = tuple(segments)
    rules = rules or SegmentationRules()
    policy = policy or ValidationPolicy()
    pron = _pron_concat_check(compound, segments, evidence)
    compound_trans = evidence.translate(compound)
    phrase_trans = evidence.translate_phrase(segments)
    if compound_trans is None or phrase_trans is None:
        trans = UNAVAILABLE
    else:
        trans = PASS if compound_trans == phrase_trans else FAIL
    rule_outcome = rules.check(segments)
    accepted = policy.accepts(pron, trans, rule_outcome)
    return SegPair(compound, segments, pron, trans, rule_outcome, accepted)


class SegPairTable:
    """Immutable ngram-to-compound replacement table."""

    def __init__(
        self,
        pairs: Mapping[tuple[str, ...], str] | None = None,
        verdicts: Iterable[SegPair] = (),
    ):
        self.pairs: dict[tuple[str, ...], str] = dict(pairs or {})
        for ngram, compound in self.pairs.items():
            if "".join(ngram) != compound:
                raise ValueError(
                    f"table entry {list(ngram)} does not concatenate to {compound!r}"
                )
        self.verdicts: tuple[SegPair, ...] = tuple(verdicts)
        self.stats: dict[tuple[str, ...], int] = {n: 0 for n in self.pairs}
        self.max_ngram = max((len(n) for n in self.pairs), default=0)

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[SegPair],
        unigrams: UnigramTable | None = None,
        verdicts: Iterable[SegPair] = (),
    ) -> "SegPairTable":
        """Build a table from accepted pairs, resolving ngram-key collisions
        toward the compound with the higher unigram weight."""
        unigrams = unigrams or UnigramTable()
        chosen: dict[tuple[str, ...], str] = {}
        for pair in pairs:
            if not pair.accepted:
                continue
            ngram, compound = pair.segments, pair.compound
            incumbent = chosen.get(ngram)
            if incumbent is None or incumbent == compound:
                chosen[ngram] = compound
                continue
            keep = min(
                (incumbent, compound), key=lambda w: (-unigrams.weight(w), w)
            )
            logger.info(
                "ngram %s maps to both %r and %r; keeping %r by unigram weight",
                " ".join(ngram), incumbent, compound, keep,
            )
            chosen[ngram] = keep
        return cls(chosen, verdicts)

    def __len__(self) -> int:
        return len(self.pairs)


def _replace_pass(
    tokens: Sequence[str], table: SegPairTable, counter: dict | None
) -> tuple[list[str], bool]:
    out: list[str] = []
    i = 0
    changed = False
    n = len(tokens)
    while i < n:
        match = None
        for width in range(min(table.max_ngram, n - i), 1, -1):
            ngram = tuple(tokens[i : i + width])
            if ngram in table.pairs:
                match = ngram
                break
        if match is None:
            out.append(tokens[i])
            i += 1
        else:
            out.append(table.pairs[match])
            i += len(match)
            changed = True
            if counter is not None:
                counter[match] = counter.get(match, 0) + 1
    return out, changed


def apply_seg_table(
    tokens: Sequence[str],
    table: SegPairTable,
    max_passes: int = 5,
    counter: dict | None = None,
) -> tuple[str, ...]:
    """Replace table ngrams by their compounds until no ngram remains.

    Each pass scans left to right taking the longest match at each position;
    replacements can enable further matches, so passes repeat to a fixpoint.
    A table still firing after max_passes raises CyclicReplacementError.
    """
    current: Sequence[str] = tokens
    if not table.pairs:
        return tuple(current)
    for _ in range(max_passes):
        current, changed = _replace_pass(current, table, counter)
        if not changed:
            return tuple(current)
    still = sorted(
        ngram
        for ngram in table.pairs
        if any(tuple(current[i : i + len(ngram)]) == ngram for i in range(len(current)))
    )
    if still:
        raise CyclicReplacementError(still)
    return tuple(current)


def mine_seg_pairs(
    corpus: Corpus | Iterable[Sequence[str]],
    model: SegmenterModel,
    evidence: EvidenceSource,
    rules: SegmentationRules | None = None,
    policy: ValidationPolicy | None = None,
    unigrams: UnigramTable | None = None,
    include_hypothesis: bool = False,
    jobs: int = 1,
) -> SegPairTable:
    """Segment and validate distinct corpus words into a replacement table.

    Words come from the reference side (hypothesis side too when
    include_hypothesis is set); the returned table also carries every
    judged candidate, accepted or not, for review export.
    """
    words: set[str] = set()
    if isinstance(corpus, Corpus):
        for utterance in corpus:
            words.update(utterance.reference)
            if include_hypothesis:
                words.update(utterance.hypothesis)
    else:
        for seq in corpus:
            words.update(seq)

    def judge(word: str) -> SegPair | None:
        segments = model.segment(word)
        if segments is None:
            return None
        return validate_split(word, segments, evidence, rules, policy)

    ordered = sorted(words)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            judged = list(pool.map(judge, ordered))
    else:
        judged = [judge(w) for w in ordered]
    verdicts = tuple(pair for pair in judged if pair is not None)
    accepted = [pair for pair in verdicts if pair.accepted]
    logger.info("segmented %d candidate words, accepted %d pairs", len(verdicts), len(accepted))
    return SegPairTable.from_pairs(accepted, unigrams, verdicts=verdicts)


def write_seg_review(pairs: Iterable[SegPair], path) -> None:
    """Write the expert review file, one candidate split per row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(SEG_REVIEW_HEADER) + "\n")
        for pair in pairs:
            fh.write(
                "\t".join(
                    (
                        pair.compound,
                        " ".join(pair.segments),
                        pair.pronunciation,
                        pair.translation,
                        pair.rules,
                        "true" if pair.accepted else "false",
                    )
                )
                + "\n"
            )


def read_seg_review(path) -> tuple[SegPair, ...]:
    """Read a review file back, honoring expert verdicts when present."""
    pairs: list[SegPair] = []
    first_row = True
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if first_row:
                first_row = False
                if fields[: len(SEG_REVIEW_HEADER)] == list(SEG_REVIEW_HEADER):
                    continue
            if len(fields) not in (6, 7):
                raise ValueError(
                    f"{path}:{lineno}: expected 6 or 7 tab-separated fields, got {len(fields)}"
                )
            compound, segments_text, pron, trans, rules, accepted_text = fields[:6]
            for outcome, allowed in (
                (pron, (PASS, FAIL, UNAVAILABLE)),
                (trans, (PASS, FAIL, UNAVAILABLE)),
                (rules, (PASS, FAIL)),
            ):
                if outcome not in allowed:
                    raise ValueError(f"{path}:{lineno}: unknown outcome {outcome!r}")
            accepted = _parse_bool(accepted_text, path, lineno)
            if len(fields) == 7 and fields[6].strip():
                verdict = fields[6].strip().casefold()
                if verdict not in ("accept", "reject"):
                    raise ValueError(
                        f"{path}:{lineno}: verdict must be accept or reject, got {fields[6]!r}"
                    )
                accepted = verdict == "accept"
            try:
                pairs.append(
                    SegPair(compound, tuple(segments_text.split()), pron, trans, rules, accepted)
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return tuple(pairs)


class SegmentationNormalizer(BaseEstimator, TransformerMixin):
    """Estimator that mines a SegPairTable in fit and joins ngrams in transform.

    fit accepts a Corpus (segmenter trained on both sides, pairs mined from
    the reference side) or any collection of token sequences.
    """

    def __init__(
        self,
        evidence: EvidenceSource | None = None,
        method: str = "unigram",
        max_segments: int = 3,
        num_merges: int = 500,
        min_segment_chars: int = 1,
        forbidden_initial: Iterable[str] = (),
        require_pron: bool = True,
        require_trans: bool = False,
        include_hypothesis: bool = False,
        unigrams: UnigramTable | None = None,
        jobs: int = 1,
    ):
        self.evidence = evidence
        self.method = method
        self.max_segments = max_segments
        self.num_merges = num_merges
        self.min_segment_chars = min_segment_chars
        self.forbidden_initial = forbidden_initial
        self.require_pron = require_pron
        self.require_trans = require_trans
        self.include_hypothesis = include_hypothesis
        self.unigrams = unigrams
        self.jobs = jobs

    def fit(self, X, y=None):
        if self.evidence is None:
            raise ValueError("SegmentationNormalizer requires an evidence source to mine")
        if isinstance(X, Corpus):
            vocab = extract_vocabulary(X, source="both")
            weights = self.unigrams or UnigramTable.from_corpus(X)
            source: Corpus | list = X
        else:
            sequences = check_token_sequences(X)
            counts: dict[str, int] = {}
            for seq in sequences:
                for token in seq:
                    counts[token] = counts.get(token, 0) + 1
            vocab = Vocabulary(counts)
            weights = self.unigrams or UnigramTable(counts)
            source = sequences
        self.model_ = train_segmenter(
            vocab, self.method, self.max_segments, self.num_merges
        )
        rules = SegmentationRules(self.min_segment_chars, self.forbidden_initial)
        policy = ValidationPolicy(self.require_pron, self.require_trans)
        self.table_ = mine_seg_pairs(
            source,
            self.model_,
            self.evidence,
            rules,
            policy,
            weights,
            include_hypothesis=self.include_hypothesis,
            jobs=self.jobs,
        )
        self.n_pairs_ = len(self.table_)
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        if isinstance(X, Corpus):
            return X.map_tokens(lambda tokens: apply_seg_table(tokens, self.table_))
        return [
            apply_seg_table(seq, self.table_) for seq in check_token_sequences(X)
        ]
