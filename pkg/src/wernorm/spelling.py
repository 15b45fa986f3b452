"""Spelling-variant mining and normalization.

Words are judged pairwise: two spellings are variants when their
pronunciation, transliteration, and translation signals agree wherever
available. Accepted pairs close transitively into equivalence classes and
every class member is rewritten to the class canonical, the member with the
highest unigram weight.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Corpus, Vocabulary, extract_vocabulary
from .evidence import EvidenceSource
from .unionfind import UnionFind
from .validation import check_token_sequences

logger = logging.getLogger(__name__)

AGREE = "agree"
DISAGREE = "disagree"
UNAVAILABLE = "unavailable"

SPELL_REVIEW_HEADER = (
    "word_a", "word_b", "pronunciation", "transliteration", "translation", "accepted",
)


@dataclass(frozen=True)
class AgreementPolicy:
    """How per-signal outcomes aggregate into an accept/reject decision.

    A pair is accepted when no signal disagrees and at least min_agree
    signals agree. Strict mode additionally requires every signal to be
    available, i.e. all three must agree.
    """

    min_agree: int = 2
    require_all: bool = False

    def __post_init__(self):
        if not 1 <= self.min_agree <= 3:
            raise ValueError(f"min_agree must be in 1..3, got {self.min_agree}")

    def accepts(self, outcomes: Sequence[str]) -> bool:
        if DISAGREE in outcomes:
            return False
        agreeing = sum(1 for o in outcomes if o == AGREE)
        needed = len(outcomes) if self.require_all else self.min_agree
        return agreeing >= needed


@dataclass(frozen=True)
class VariantVerdict:
    """Judgment of one unordered word pair, one outcome per signal."""

    word_a: str
    word_b: str
    pronunciation: str
    transliteration: str
    translation: str
    accepted: bool

    @property
    def outcomes(self) -> tuple[str, str, str]:
        return (self.pronunciation, self.transliteration, self.translation)

    @property
    def pair(self) -> tuple[str, str]:
        return (self.word_a, self.word_b)


def _compare_pivot(a: str | None, b: str | None) -> str:
    if a is None or b is None:
        return UNAVAILABLE
    return AGREE if a == b else DISAGREE


def judge_pair(
    a: str,
    b: str,
    evidence: EvidenceSource,
    policy: AgreementPolicy | None = None,
) -> VariantVerdict:
    """Judge whether two distinct words are spelling variants.

    Pronunciations compare as relaxed phone sequences (any-of-any across
    alternative pronunciations), transliterations and translations as
    normalized pivot strings. The verdict is symmetric in (a, b).
    """
    if a == b:
        raise ValueError(f"cannot judge a word against itself: {a!r}")
    policy = policy or AgreementPolicy()
    pron_match = evidence.pronunciation_match(a, b)
    if pron_match is None:
        pron = UNAVAILABLE
    else:
        pron = AGREE if pron_match else DISAGREE
    translit = _compare_pivot(evidence.transliterate(a), evidence.transliterate(b))
    trans = _compare_pivot(evidence.translate(a), evidence.translate(b))
    outcomes = (pron, translit, trans)
    return VariantVerdict(a, b, pron, translit, trans, policy.accepts(outcomes))


def generate_candidates(
    vocab: Vocabulary, evidence: EvidenceSource
) -> set[tuple[str, str]]:
    """All unordered word pairs sharing at least one signal key.

    Words are bucketed by each relaxed-pronunciation string, transliteration,
    and translation they carry; pairs come from within buckets only. Any pair
    the judge could accept shares at least one agreeing signal, so blocking
    loses nothing relative to the quadratic scan it replaces.
    """
    words = sorted(vocab.entries)
    evidence.prefetch(words)
    buckets: dict[tuple[str, str], list[str]] = {}
    for word in words:
        keys: set[tuple[str, str]] = set()
        for pron in evidence.relaxed_pronunciations(word):
            keys.add(("pron", " ".join(pron)))
        translit = evidence.transliterate(word)
        if translit is not None:
            keys.add(("translit", translit))
        translation = evidence.translate(word)
        if translation is not None:
            keys.add(("trans", translation))
        for key in keys:
            buckets.setdefault(key, []).append(word)
    pairs: set[tuple[str, str]] = set()
    for bucket in buckets.values():
        if len(bucket) > 1:
            pairs.update(combinations(bucket, 2))  # buckets hold sorted distinct words
    return pairs


def mine_spell_pairs(
    vocab: Vocabulary,
    evidence: EvidenceSource,
    policy: AgreementPolicy | None = None,
    jobs: int = 1,
) -> tuple[VariantVerdict, ...]:
    """Judge every candidate pair in the vocabulary, in deterministic order."""
    policy = policy or AgreementPolicy()
    candidates = sorted(generate_candidates(vocab, evidence))
    if not candidates:
        return ()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(
                pool.map(lambda p: judge_pair(p[0], p[1], evidence, policy), candidates)
            )
    else:
        verdicts = [judge_pair(a, b, evidence, policy) for a, b in candidates]
    accepted = sum(1 for v in verdicts if v.accepted)
    logger.info("judged %d candidate pairs, accepted %d", len(verdicts), accepted)
    return tuple(verdicts)


class UnigramTable:
    """Non-negative word weights used to pick canonical display forms."""

    def __init__(self, weights: Mapping[str, float] | None = None):
        self._weights: dict[str, float] = {}
        for word, weight in (weights or {}).items():
            weight = float(weight)
            if weight < 0:
                raise ValueError(f"negative weight for {word!r}: {weight}")
            self._weights[word] = weight

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "UnigramTable":
        """Reference-side token counts."""
        counts: dict[str, float] = {}
        for utterance in corpus:
            for token in utterance.reference:
                counts[token] = counts.get(token, 0.0) + 1.0
        return cls(counts)

    @classmethod
    def load(cls, path) -> "UnigramTable":
        """Load `word<TAB>weight` lines."""
        weights: dict[str, float] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\r\n")
                if not line:
                    continue
                word, sep, weight_text = line.partition("\t")
                if not sep or not word:
                    raise ValueError(f"{path}:{lineno}: expected `word<TAB>weight`")
                try:
                    weight = float(weight_text)
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: weight is not a number: {weight_text!r}"
                    ) from None
                if weight < 0:
                    raise ValueError(f"{path}:{lineno}: negative weight: {weight}")
                weights[word] = weight
        return cls(weights)

    def weight(self, word: str) -> float:
        return self._weights.get(word, 0.0)

    def __len__(self) -> int:
        return len(self._weights)


def build_unigram_table(corpus: Corpus | None = None, counts_path=None) -> UnigramTable:
    """Unigram weights from an external counts file, else corpus reference counts."""
    if counts_path is not None:
        return UnigramTable.load(counts_path)
    if corpus is not None:
        return UnigramTable.from_corpus(corpus)
    return UnigramTable()


class SpellMap:
    """A partition of some words into variant classes, one canonical each."""

    def __init__(
        self,
        classes: Iterable[Iterable[str]] = (),
        canonicals: Iterable[str] = (),
    ):
        self.classes: tuple[tuple[str, ...], ...] = tuple(
            tuple(sorted(set(c))) for c in classes
        )
        canonicals = tuple(canonicals)
        if len(canonicals) != len(self.classes):
            raise ValueError("one canonical is required per class")
        self._replace: dict[str, str] = {}
        self._class_id: dict[str, int] = {}
        for i, (members, canonical) in enumerate(zip(self.classes, canonicals)):
            if canonical not in members:
                raise ValueError(f"canonical {canonical!r} is not in its class")
            for word in members:
                if word in self._class_id:
                    raise ValueError(f"word {word!r} appears in two classes")
                self._class_id[word] = i
                self._replace[word] = canonical

    def __len__(self) -> int:
        return len(self.classes)

    def replacement(self, word: str) -> str:
        """The word's class canonical; the word itself when unmapped."""
        return self._replace.get(word, word)

    def canonical(self, class_index: int) -> str:
        return self._replace[self.classes[class_index][0]]

    def class_of(self, word: str) -> tuple[str, ...] | None:
        i = self._class_id.get(word)
        return None if i is None else self.classes[i]

    def equality(self) -> Callable[[str, str], bool]:
        """Class-aware token equality for alignment without rewriting.

        Two tokens compare equal when identical or in the same class, which
        yields the same WER as rewriting both sides to canonicals.
        """
        ids = self._class_id

        def equal(a: str, b: str) -> bool:
            if a == b:
                return True
            i = ids.get(a)
            return i is not None and i == ids.get(b)

        return equal


def build_spell_map(
    pairs: Iterable[VariantVerdict | tuple[str, str]],
    unigrams: UnigramTable | None = None,
) -> SpellMap:
    """Close accepted pairs transitively and pick canonicals by weight.

    Ties in unigram weight break toward the smallest code-point sequence so
    rebuilds are reproducible.
    """
    unigrams = unigrams or UnigramTable()
    uf = UnionFind()
    for pair in pairs:
        a, b = pair.pair if isinstance(pair, VariantVerdict) else pair
        uf.union(a, b)
    classes = [g for g in uf.groups() if len(g) > 1]
    canonicals = [min(cls, key=lambda w: (-unigrams.weight(w), w)) for cls in classes]
    chained = sum(1 for cls in classes if len(cls) > 2)
    if chained:
        logger.info("%d of %d variant classes were formed by chains", chained, len(classes))
    return SpellMap(classes, canonicals)


def apply_spell_map(tokens: Sequence[str], spell_map: SpellMap) -> tuple[str, ...]:
    """Replace every class member by its canonical; length is preserved."""
    replace = spell_map.replacement
    return tuple(replace(t) for t in tokens)


def _parse_bool(text: str, path, lineno: int) -> bool:
    lowered = text.strip().casefold()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"{path}:{lineno}: expected true/false, got {text!r}")


def write_spell_review(verdicts: Iterable[VariantVerdict], path) -> None:
    """Write the expert review file, one judged pair per row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(SPELL_REVIEW_HEADER) + "\n")
        for v in verdicts:
            fh.write(
                "\t".join(
                    (
                        v.word_a,
                        v.word_b,
                        v.pronunciation,
                        v.transliteration,
                        v.translation,
                        "true" if v.accepted else "false",
                    )
                )
                + "\n"
            )


def read_spell_review(path) -> tuple[VariantVerdict, ...]:
    """Read a review file back, honoring expert verdicts when present.

    A trailing `verdict` column of accept/reject overrides the stored
    accepted flag; an empty verdict keeps it.
    """
    verdicts: list[VariantVerdict] = []
    first_row = True
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            fields = line.split("\t")
            if first_row:
                first_row = False
                if fields[: len(SPELL_REVIEW_HEADER)] == list(SPELL_REVIEW_HEADER):
                    continue
            if len(fields) not in (6, 7):
                raise ValueError(
                    f"{path}:{lineno}: expected 6 or 7 tab-separated fields, got {len(fields)}"
                )
            word_a, word_b, pron, translit, trans, accepted_text = fields[:6]
            for outcome in (pron, translit, trans):
                if outcome not in (AGREE, DISAGREE, UNAVAILABLE):
                    raise ValueError(f"{path}:{lineno}: unknown outcome {outcome!r}")
            accepted = _parse_bool(accepted_text, path, lineno)
            if len(fields) == 7 and fields[6].strip():
                verdict = fields[6].strip().casefold()
                if verdict not in ("accept", "reject"):
                    raise ValueError(
                        f"{path}:{lineno}: verdict must be accept or reject, got {fields[6]!r}"
                    )
                accepted = verdict == "accept"
            verdicts.append(VariantVerdict(word_a, word_b, pron, translit, trans, accepted))
    return tuple(verdicts)


class SpellingNormalizer(BaseEstimator, TransformerMixin):
    """Estimator that mines a SpellMap in fit and rewrites tokens in transform.

    fit accepts a Corpus (mines over both sides, weights from reference
    counts) or any collection of token sequences. transform mirrors the
    input kind: Corpus in, Corpus out.
    """

    def __init__(
        self,
        evidence: EvidenceSource | None = None,
        min_agree: int = 2,
        require_all: bool = False,
        unigrams: UnigramTable | None = None,
        jobs: int = 1,
    ):
        self.evidence = evidence
        self.min_agree = min_agree
        self.require_all = require_all
        self.unigrams = unigrams
        self.jobs = jobs

    def fit(self, X, y=None):
        if self.evidence is None:
            raise ValueError("SpellingNormalizer requires an evidence source to mine")
        policy = AgreementPolicy(self.min_agree, self.require_all)
        if isinstance(X, Corpus):
            vocab = extract_vocabulary(X, source="both")
            weights = self.unigrams or UnigramTable.from_corpus(X)
        else:
            sequences = check_token_sequences(X)
            counts: dict[str, int] = {}
            for seq in sequences:
                for token in seq:
                    counts[token] = counts.get(token, 0) + 1
            vocab = Vocabulary(counts)
            weights = self.unigrams or UnigramTable(counts)
        self.verdicts_ = mine_spell_pairs(vocab, self.evidence, policy, jobs=self.jobs)
        accepted = [v for v in self.verdicts_ if v.accepted]
        self.spell_map_ = build_spell_map(accepted, weights)
        self.n_classes_ = len(self.spell_map_)
        return self

    def transform(self, X):
        check_is_fitted(self, "spell_map_")
        if isinstance(X, Corpus):
            return X.map_tokens(lambda tokens: apply_spell_map(tokens, self.spell_map_))
        return [apply_spell_map(seq, self.spell_map_) for seq in check_token_sequences(X)]
