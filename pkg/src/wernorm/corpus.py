"""Corpus loading, tokenization, and vocabulary extraction.

A corpus is an ordered list of (reference, hypothesis) token-sequence pairs.
All text is normalized to composed Unicode form (NFC) on load so that
downstream code compares like code-point sequences with like.
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

VOCAB_SOURCES = ("reference", "hypothesis", "both")
CORPUS_FORMATS = ("tsv", "jsonl")


class CorpusLoadError(ValueError):
    """A corpus file record is malformed or violates corpus invariants."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
            where += f"{line}: " if line is not None else " "
        super().__init__(where + message)
        self.path = path
        self.line = line


def tokenize(text: str, strip_chars: str | None = None) -> tuple[str, ...]:
    """Split text into whitespace-delimited tokens in composed (NFC) form.

    Tokens are never empty and never contain whitespace. When strip_chars
    is given, those characters are stripped from token edges and tokens
    that become empty are dropped; by default nothing is stripped, so
    tokenization is lossless apart from whitespace.
    """
    tokens = unicodedata.normalize("NFC", text).split()
    if strip_chars:
        tokens = [t.strip(strip_chars) for t in tokens]
        tokens = [t for t in tokens if t]
    return tuple(tokens)


@dataclass(frozen=True)
class Utterance:
    """One reference/hypothesis pair, already tokenized."""

    id: str
    reference: tuple[str, ...]
    hypothesis: tuple[str, ...]


@dataclass(frozen=True)
class Corpus:
    """Ordered utterances plus the language tag they were collected under.

    Immutable after construction and safe to share across threads.
    """

    utterances: tuple[Utterance, ...]
    locale: str = ""

    def __post_init__(self):
        seen: set[str] = set()
        for utterance in self.utterances:
            if utterance.id in seen:
                raise ValueError(f"duplicate utterance id {utterance.id!r}")
            seen.add(utterance.id)

    def __len__(self) -> int:
        return len(self.utterances)

    def __iter__(self) -> Iterator[Utterance]:
        return iter(self.utterances)

    def map_tokens(self, fn: Callable[[Sequence[str]], Iterable[str]]) -> "Corpus":
        """Apply fn to both the reference and the hypothesis of every utterance.

        Normalization is always symmetric; this is the only rewrite hook.
        """
        return Corpus(
            tuple(
                Utterance(u.id, tuple(fn(u.reference)), tuple(fn(u.hypothesis)))
                for u in self.utterances
            ),
            self.locale,
        )


@dataclass(frozen=True)
class Vocabulary:
    """Word occurrence counts over one side (or both sides) of a corpus."""

    entries: dict[str, int]
    source: str = "both"

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def count(self, word: str) -> int:
        return self.entries.get(word, 0)

    @property
    def total(self) -> int:
        return sum(self.entries.values())


def load_corpus(
    path,
    locale: str = "",
    format: str = "tsv",
    strip_chars: str | None = None,
) -> Corpus:
    """Load a corpus file into tokenized, NFC-normalized utterances.

    The default format is one record per line, `id<TAB>reference<TAB>hypothesis`,
    UTF-8. `format="jsonl"` accepts one JSON object per line with fields
    {id, ref, hyp}. Empty reference or hypothesis fields become empty token
    sequences; blank lines are skipped. Missing fields and duplicate ids
    raise CorpusLoadError naming the offending line.
    """
    if format not in CORPUS_FORMATS:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {CORPUS_FORMATS}")
    path = Path(path)
    utterances: list[Utterance] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            if format == "tsv":
                fields = line.split("\t")
                if len(fields) != 3:
                    raise CorpusLoadError(
                        f"expected 3 tab-separated fields, got {len(fields)}", path, lineno
                    )
                utt_id, ref_text, hyp_text = fields
            else:
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusLoadError(f"invalid JSON record: {exc}", path, lineno) from exc
                if not isinstance(record, dict):
                    raise CorpusLoadError("record is not a JSON object", path, lineno)
                missing = [k for k in ("id", "ref", "hyp") if k not in record]
                if missing:
                    raise CorpusLoadError(f"record missing fields {missing}", path, lineno)
                utt_id, ref_text, hyp_text = record["id"], record["ref"], record["hyp"]
            utt_id = unicodedata.normalize("NFC", str(utt_id)).strip()
            if not utt_id:
                raise CorpusLoadError("empty utterance id", path, lineno)
            if utt_id in seen:
                raise CorpusLoadError(f"duplicate utterance id {utt_id!r}", path, lineno)
            seen.add(utt_id)
            utterances.append(
                Utterance(utt_id, tokenize(str(ref_text), strip_chars), tokenize(str(hyp_text), strip_chars))
            )
    return Corpus(tuple(utterances), locale)


def write_corpus(corpus: Corpus, path) -> None:
    """Write a corpus back out in the tab-separated format."""
    with open(path, "w", encoding="utf-8") as fh:
        for utt in corpus:
            fh.write(f"{utt.id}\t{' '.join(utt.reference)}\t{' '.join(utt.hypothesis)}\n")


def extract_vocabulary(corpus: Corpus, source: str = "both") -> Vocabulary:
    """Count distinct words over the requested side(s) of a corpus.

    The result is a pure function of the multiset of utterances; entries
    are stored in sorted word order so equal corpora in any utterance order
    produce structurally identical vocabularies.
    """
    if source not in VOCAB_SOURCES:
        raise ValueError(f"unknown vocabulary source {source!r}; expected one of {VOCAB_SOURCES}")
    counts: Counter[str] = Counter()
    for utt in corpus:
        if source in ("reference", "both"):
            counts.update(utt.reference)
        if source in ("hypothesis", "both"):
            counts.update(utt.hypothesis)
    return Vocabulary(dict(sorted(counts.items())), source)
