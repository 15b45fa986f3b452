"""Per-word pronunciation, transliteration, and translation signals.

Providers are file-backed dictionaries by default so mining runs offline;
a generic HTTP adapter covers hosted transliteration/translation services.
An EvidenceSource bundles the three providers behind a single cache so a
mining run never queries any provider twice for the same word.
"""

from __future__ import annotations

import json
import logging
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .unionfind import UnionFind

logger = logging.getLogger(__name__)

PhoneSeq = tuple[str, ...]

_BULK_CHUNK = 256


def _data_error(path, lineno: int, message: str) -> ValueError:
    return ValueError(f"{path}:{lineno}: {message}")


def _as_phone_seq(value) -> PhoneSeq:
    if isinstance(value, str):
        return tuple(value.split())
    return tuple(value)


def _as_pron_variants(value) -> tuple[PhoneSeq, ...]:
    """Accept one pronunciation ("k ah l" or ["k","ah","l"]) or a list of them."""
    if isinstance(value, str):
        return (_as_phone_seq(value),)
    items = list(value)
    if items and all(isinstance(x, str) for x in items) and not any(" " in x for x in items):
        return (tuple(items),)  # a single sequence of phone symbols
    return tuple(_as_phone_seq(x) for x in items)


def normalize_pivot(value: str | None) -> str | None:
    """Case-fold and whitespace-normalize a provider's pivot-form output."""
    if value is None:
        return None
    folded = " ".join(value.split()).casefold()
    return folded or None


class PronunciationLexicon:
    """Word to phone-sequence lookup with optional grapheme-rule fallback.

    Lexicon lines are `word<TAB>phone phone ...`; repeated words add
    alternative pronunciations. Malformed lines fail at load time, never
    at query time.
    """

    def __init__(self, entries: Mapping | None = None, rules: "GraphemeRules | None" = None):
        self._entries: dict[str, tuple[PhoneSeq, ...]] = {}
        if entries:
            for word, prons in entries.items():
                self._entries[word] = _as_pron_variants(prons)
        self.rules = rules

    @classmethod
    def load(cls, path, rules: "GraphemeRules | None" = None) -> "PronunciationLexicon":
        entries: dict[str, list[PhoneSeq]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\r\n")
                if not line:
                    continue
                word, sep, phone_text = line.partition("\t")
                if not sep or not word:
                    raise _data_error(path, lineno, "expected `word<TAB>phone phone ...`")
                phones = tuple(phone_text.split())
                if not phones:
                    raise _data_error(path, lineno, f"no phones given for {word!r}")
                variants = entries.setdefault(word, [])
                if phones not in variants:
                    variants.append(phones)
        lexicon = cls(rules=rules)
        lexicon._entries = {w: tuple(v) for w, v in entries.items()}
        return lexicon

    def lookup(self, word: str) -> tuple[PhoneSeq, ...]:
        """All pronunciations of a word; () on a miss."""
        found = self._entries.get(word)
        if found:
            return found
        if self.rules is not None:
            derived = self.rules.apply(word)
            if derived is not None:
                return (derived,)
        return ()

    def __len__(self) -> int:
        return len(self._entries)


class GraphemeRules:
    """Greedy longest-match grapheme-to-phone rules for lexicon misses.

    Rule lines are `grapheme<TAB>phone [phone ...]` (an empty phone list
    marks a silent grapheme). A word containing any unmatched character has
    no rule-derived pronunciation.
    """

    def __init__(self, rules: Mapping[str, object]):
        self._rules = {g: _as_phone_seq(p) for g, p in rules.items()}
        self._max_len = max((len(g) for g in self._rules), default=0)

    @classmethod
    def load(cls, path) -> "GraphemeRules":
        rules: dict[str, PhoneSeq] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\r\n")
                if not line:
                    continue
                grapheme, sep, phone_text = line.partition("\t")
                if not sep or not grapheme:
                    raise _data_error(path, lineno, "expected `grapheme<TAB>phone ...`")
                rules[grapheme] = tuple(phone_text.split())
        return cls(rules)

    def apply(self, word: str) -> PhoneSeq | None:
        phones: list[str] = []
        i = 0
        while i < len(word):
            for size in range(min(self._max_len, len(word) - i), 0, -1):
                chunk = word[i : i + size]
                if chunk in self._rules:
                    phones.extend(self._rules[chunk])
                    i += size
                    break
            else:
                return None
        return tuple(phones)


class RelaxationTable:
    """Equivalence classes over phone symbols for tolerant pronunciation equality.

    Built from unordered phone pairs whose transitive closure forms the
    classes; each phone maps to its class representative (the smallest
    member), so representative() is idempotent by construction.
    """

    def __init__(self, pairs: Iterable[Sequence[str]] = ()):
        uf = UnionFind()
        seen: set[tuple[str, str]] = set()
        for a, b in pairs:
            if not a or not b:
                raise ValueError("phone symbols must be non-empty")
            if a != b:
                seen.add((min(a, b), max(a, b)))
            uf.union(a, b)
        self.pairs = frozenset(seen)
        self._rep: dict[str, str] = {}
        for group in uf.groups():
            rep = group[0]
            for phone in group:
                self._rep[phone] = rep

    @classmethod
    def load(cls, path) -> "RelaxationTable":
        """Load `phoneA<SPACE>phoneB` lines; blank lines are skipped."""
        pairs: list[tuple[str, str]] = []
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise _data_error(path, lineno, "expected `phoneA phoneB`")
                pairs.append((parts[0], parts[1]))
        return cls(pairs)

    def representative(self, phone: str) -> str:
        return self._rep.get(phone, phone)

    def relax(self, seq: Sequence[str]) -> PhoneSeq:
        """Replace each phone by its class representative; length preserved."""
        rep = self._rep
        return tuple(rep.get(p, p) for p in seq)


class PivotDictionary:
    """File-backed word to pivot-form lookup (`word<TAB>pivot_form` lines).

    Keys may contain spaces (phrase entries), since columns are tab
    separated. Later entries for the same key override earlier ones.
    """

    def __init__(self, mapping: Mapping[str, str] | None = None):
        self._mapping = dict(mapping or {})

    @classmethod
    def load(cls, path) -> "PivotDictionary":
        mapping: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\r\n")
                if not line:
                    continue
                word, sep, pivot = line.partition("\t")
                if not sep or not word or not pivot.strip():
                    raise _data_error(path, lineno, "expected `word<TAB>pivot_form`")
                mapping[word] = pivot
        return cls(mapping)

    def lookup(self, word: str) -> str | None:
        return self._mapping.get(word)

    def __len__(self) -> int:
        return len(self._mapping)


class RemotePivotProvider:
    """Generic HTTP adapter for a hosted transliteration/translation service.

    Sends a JSON batch `{"mode": ..., "pivot": ..., "words": [...]}` by POST
    and expects `{"results": {word: form-or-null, ...}}` back. Requests are
    retried; on exhaustion the lookup degrades to a miss so a mining run is
    never aborted by network trouble, and after max_failures exhausted
    batches the provider disables itself for the rest of the run.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        mode: str = "translate",
        pivot: str = "en",
        timeout: float = 10.0,
        retries: int = 3,
        max_failures: int = 3,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self.mode = mode
        self.pivot = pivot
        self.timeout = timeout
        self.retries = retries
        self.max_failures = max_failures
        self._failed_batches = 0
        self._disabled = False

    def lookup(self, word: str) -> str | None:
        return self.lookup_batch([word]).get(word)

    def lookup_batch(self, words: Sequence[str]) -> dict[str, str | None]:
        if self._disabled or not words:
            return {w: None for w in words}
        payload = json.dumps(
            {"mode": self.mode, "pivot": self.pivot, "words": list(words)}
        ).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        last_error: Exception | None = None
        for _ in range(max(1, self.retries)):
            request = urllib.request.Request(self.endpoint, data=payload, headers=headers)
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as response:
                    body = json.loads(response.read().decode("utf-8"))
                results = body.get("results", {})
                return {w: results.get(w) for w in words}
            except (urllib.error.URLError, OSError, ValueError) as exc:
                last_error = exc
        self._failed_batches += 1
        logger.warning(
            "pivot lookup for %d word(s) failed after %d attempt(s): %s",
            len(words), max(1, self.retries), last_error,
        )
        if self._failed_batches >= self.max_failures and not self._disabled:
            self._disabled = True
            logger.warning(
                "disabling pivot endpoint %s after %d failed batches; "
                "remaining lookups degrade to misses", self.endpoint, self._failed_batches,
            )
        return {w: None for w in words}


@dataclass(frozen=True)
class EvidenceRecord:
    """Bundle of per-word signals; any signal may be absent on a provider miss."""

    word: str
    pronunciations: tuple[PhoneSeq, ...] = ()
    transliteration: str | None = None
    translation: str | None = None

    @property
    def pronunciation(self) -> PhoneSeq | None:
        """Primary (first listed) pronunciation, if any."""
        return self.pronunciations[0] if self.pronunciations else None


def _as_pron_provider(provider):
    if provider is None or hasattr(provider, "lookup"):
        return provider
    if isinstance(provider, Mapping):
        return PronunciationLexicon(provider)
    raise TypeError("pronunciations must be a provider with .lookup() or a mapping")


def _as_pivot_provider(provider):
    if provider is None or hasattr(provider, "lookup"):
        return provider
    if isinstance(provider, Mapping):
        return PivotDictionary(provider)
    raise TypeError("pivot provider must expose .lookup() or be a mapping")


def _bulk_lookup(provider, words: list[str]) -> dict[str, str | None]:
    if provider is None:
        return {}
    batch = getattr(provider, "lookup_batch", None)
    if batch is None:
        return {w: provider.lookup(w) for w in words}
    out: dict[str, str | None] = {}
    for i in range(0, len(words), _BULK_CHUNK):
        out.update(batch(words[i : i + _BULK_CHUNK]))
    return out


class EvidenceSource:
    """Cached access to all three signals plus phone-pair relaxation.

    Records are pure functions of the word given fixed provider data; the
    cache is a grow-only map, so concurrent mining workers may share one
    source (a rare duplicate build under a race is harmless).
    """

    def __init__(
        self,
        pronunciations=None,
        transliterations=None,
        translations=None,
        relaxation: RelaxationTable | None = None,
    ):
        self._pron = _as_pron_provider(pronunciations)
        self._translit = _as_pivot_provider(transliterations)
        self._trans = _as_pivot_provider(translations)
        self.relaxation = relaxation or RelaxationTable()
        self._cache: dict[str, EvidenceRecord] = {}

    def evidence_for(self, word: str) -> EvidenceRecord:
        """All signals for a word, each independently optional."""
        record = self._cache.get(word)
        if record is None:
            record = EvidenceRecord(
                word,
                tuple(self._pron.lookup(word)) if self._pron else (),
                normalize_pivot(self._translit.lookup(word)) if self._translit else None,
                normalize_pivot(self._trans.lookup(word)) if self._trans else None,
            )
            record = self._cache.setdefault(word, record)
        return record

    def prefetch(self, words: Iterable[str]) -> None:
        """Warm the cache, using provider batch endpoints where available."""
        missing = sorted({w for w in words if w not in self._cache})
        if not missing:
            return
        translits = _bulk_lookup(self._translit, missing)
        translations = _bulk_lookup(self._trans, missing)
        for word in missing:
            record = EvidenceRecord(
                word,
                tuple(self._pron.lookup(word)) if self._pron else (),
                normalize_pivot(translits.get(word)),
                normalize_pivot(translations.get(word)),
            )
            self._cache.setdefault(word, record)

    def pronounce(self, word: str) -> PhoneSeq | None:
        return self.evidence_for(word).pronunciation

    def pronunciations(self, word: str) -> tuple[PhoneSeq, ...]:
        return self.evidence_for(word).pronunciations

    def transliterate(self, word: str) -> str | None:
        return self.evidence_for(word).transliteration

    def translate(self, word: str) -> str | None:
        return self.evidence_for(word).translation

    def relaxed_pronunciations(self, word: str) -> tuple[PhoneSeq, ...]:
        """Distinct pronunciations after phone-pair relaxation, in lexicon order."""
        out: list[PhoneSeq] = []
        seen: set[PhoneSeq] = set()
        for pron in self.evidence_for(word).pronunciations:
            relaxed = self.relaxation.relax(pron)
            if relaxed not in seen:
                seen.add(relaxed)
                out.append(relaxed)
        return tuple(out)

    def pronunciation_match(self, a: str, b: str) -> bool | None:
        """Whether any pronunciations of a and b agree after relaxation.

        None when either word has no pronunciation at all.
        """
        pa = self.relaxed_pronunciations(a)
        pb = self.relaxed_pronunciations(b)
        if not pa or not pb:
            return None
        return not set(pa).isdisjoint(pb)

    def translate_phrase(self, tokens: Sequence[str]) -> str | None:
        """Pivot translation of a token ngram.

        A whole-phrase provider entry wins; otherwise per-token translations
        are joined with spaces, and the phrase is a miss if any token is.
        """
        whole = self.evidence_for(" ".join(tokens)).translation
        if whole is not None:
            return whole
        parts = [self.evidence_for(t).translation for t in tokens]
        if any(p is None for p in parts):
            return None
        return " ".join(parts)  # parts are already normalized
